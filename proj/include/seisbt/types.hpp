#pragma once

#include <array>
#include <string>
#include <vector>

namespace seisbt {

// One station's 3-channel time series for one event. Channel 0 is vertical,
// channels 1 and 2 are the horizontals. Absent channels are zero-filled and
// masked out.
struct WaveformRecord {
  double sample_rate_hz = 0.0;
  std::array<bool, 3> channel_mask{true, true, true};
  std::array<std::vector<double>, 3> channels;

  std::size_t n_samples() const { return channels[0].size(); }
  int n_channels() const { return channel_mask[1] ? 3 : 1; }
};

// One catalog row: an (event, station) observation plus its ground-truth
// source and path attributes.
struct CatalogRow {
  std::string event_id;
  std::string station_id;
  int event_class = 0;
  double depth_km = 0.0;
  double event_lat = 0.0;
  double event_lon = 0.0;
  double station_lat = 0.0;
  double station_lon = 0.0;
  double distance_km = 0.0;
  int n_channels = 3;
  std::string waveform_path;
};

struct EventCatalog {
  std::vector<CatalogRow> rows;
};

// Normalized 3xFxT spectrogram tensor plus the catalog row it came from.
// Tensor layout is channel-major: tensor[c*F*T + f*T + t].
struct SpectrogramSample {
  int n_freq = 0;
  int n_time = 0;
  std::array<bool, 3> channel_mask{true, true, true};
  std::vector<double> tensor;
  CatalogRow meta;

  double& at(int c, int f, int t) {
    return tensor[(static_cast<std::size_t>(c) * n_freq + f) * n_time + t];
  }
  double at(int c, int f, int t) const {
    return tensor[(static_cast<std::size_t>(c) * n_freq + f) * n_time + t];
  }
};

}  // namespace seisbt
