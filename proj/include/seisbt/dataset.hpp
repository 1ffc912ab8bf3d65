#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "seisbt/dsp.hpp"
#include "seisbt/errors.hpp"
#include "seisbt/ingest.hpp"
#include "seisbt/types.hpp"

namespace seisbt {

// Preprocessed spectrogram samples plus an index by event id.
struct Dataset {
  std::vector<SpectrogramSample> samples;

  std::map<std::string, std::vector<std::size_t>> by_event() const {
    std::map<std::string, std::vector<std::size_t>> idx;
    for (std::size_t i = 0; i < samples.size(); ++i)
      idx[samples[i].meta.event_id].push_back(i);
    return idx;
  }
};

// Loads every waveform referenced by the catalog and converts it to a
// normalized spectrogram sample.
inline Dataset preprocess_catalog(const EventCatalog& cat,
                                  const std::string& base_dir,
                                  const StftConfig& cfg) {
  Dataset ds;
  ds.samples.reserve(cat.rows.size());
  for (const auto& row : cat.rows) {
    const auto rec = load_waveform(base_dir + "/" + row.waveform_path);
    ds.samples.push_back(spectrogram(rec, cfg, row));
  }
  return ds;
}

namespace detail {

inline void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
  const auto n = get_u32(is);
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw FormatError("truncated string field");
  return s;
}

inline void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}

inline double get_f64(std::istream& is) {
  double v;
  if (!is.read(reinterpret_cast<char*>(&v), 8))
    throw FormatError("truncated f64 field");
  return v;
}

}  // namespace detail

// --- STC1 spectrogram tensor cache -----------------------------------------
// magic "STC1"; u32 n_samples; u32 F; u32 T; then per sample the catalog row,
// the channel mask, and the 3xFxT f64 tensor.

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("STC1", 4);
  detail::put_u32(os, static_cast<std::uint32_t>(ds.samples.size()));
  const int F = ds.samples.empty() ? 0 : ds.samples[0].n_freq;
  const int T = ds.samples.empty() ? 0 : ds.samples[0].n_time;
  detail::put_u32(os, static_cast<std::uint32_t>(F));
  detail::put_u32(os, static_cast<std::uint32_t>(T));
  for (const auto& s : ds.samples) {
    if (s.n_freq != F || s.n_time != T)
      throw UsageError("save_dataset: inconsistent tensor shapes");
    const auto& m = s.meta;
    detail::put_string(os, m.event_id);
    detail::put_string(os, m.station_id);
    detail::put_u32(os, static_cast<std::uint32_t>(m.event_class));
    detail::put_f64(os, m.depth_km);
    detail::put_f64(os, m.event_lat);
    detail::put_f64(os, m.event_lon);
    detail::put_f64(os, m.station_lat);
    detail::put_f64(os, m.station_lon);
    detail::put_f64(os, m.distance_km);
    detail::put_u32(os, static_cast<std::uint32_t>(m.n_channels));
    detail::put_string(os, m.waveform_path);
    for (int c = 0; c < 3; ++c)
      os.put(s.channel_mask[c] ? 1 : 0);
    os.write(reinterpret_cast<const char*>(s.tensor.data()),
             static_cast<std::streamsize>(s.tensor.size() * 8));
  }
  if (!os) throw IoError("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset cache: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "STC1", 4) != 0)
    throw FormatError("bad magic, expected STC1: " + path);
  const auto n = detail::get_u32(is);
  const auto F = detail::get_u32(is);
  const auto T = detail::get_u32(is);
  Dataset ds;
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.n_freq = static_cast<int>(F);
    s.n_time = static_cast<int>(T);
    auto& m = s.meta;
    m.event_id = detail::get_string(is);
    m.station_id = detail::get_string(is);
    m.event_class = static_cast<int>(detail::get_u32(is));
    m.depth_km = detail::get_f64(is);
    m.event_lat = detail::get_f64(is);
    m.event_lon = detail::get_f64(is);
    m.station_lat = detail::get_f64(is);
    m.station_lon = detail::get_f64(is);
    m.distance_km = detail::get_f64(is);
    m.n_channels = static_cast<int>(detail::get_u32(is));
    m.waveform_path = detail::get_string(is);
    for (int c = 0; c < 3; ++c) {
      const int b = is.get();
      if (b < 0) throw FormatError("dataset cache truncated: " + path);
      s.channel_mask[c] = b != 0;
    }
    s.tensor.resize(3u * F * T);
    if (!is.read(reinterpret_cast<char*>(s.tensor.data()),
                 static_cast<std::streamsize>(s.tensor.size() * 8)))
      throw FormatError("dataset cache truncated: " + path);
  }
  return ds;
}

}  // namespace seisbt
