#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "seisbt/dsp.hpp"
#include "seisbt/errors.hpp"
#include "seisbt/ingest.hpp"
#include "seisbt/rng.hpp"
#include "seisbt/types.hpp"

namespace seisbt {

// Source parameters for one event.
struct SourceSpec {
  int class_id = 0;
  double corner_freq_hz = 2.0;
  double envelope_decay_s = 4.0;
  double depth_km = 5.0;
  double lat = 0.0;
  double lon = 0.0;
};

// Path parameters for one (event, station) record.
struct PathSpec {
  double distance_km = 1.0;
  double velocity_km_s = 6.0;
  double attenuation_alpha = 0.0;  // 1/(Hz*km)
  std::vector<double> site_filter{1.0};
  double snr_db = std::numeric_limits<double>::infinity();
};

// Parameter ranges for one source class; disjoint corner bands between
// classes give the configured spectral separability.
struct ClassTemplate {
  double corner_lo, corner_hi;
  double decay_lo, decay_hi;
  double depth_lo, depth_hi;
};

struct SynthConfig {
  int n_events = 200;
  int stations_min = 2;
  int stations_max = 8;
  int n_stations = 24;
  double sample_rate_hz = 40.0;
  double duration_s = 90.0;
  std::vector<double> class_mix{0.5, 0.5};
  std::vector<ClassTemplate> class_templates{
      {1.5, 3.0, 3.0, 6.0, 4.0, 15.0},   // earthquake-like
      {5.5, 9.0, 0.8, 2.0, 0.0, 2.0}};   // explosion-like
  double snr_db_lo = 18.0;
  double snr_db_hi = 30.0;
  double velocity_km_s = 6.0;
  double attenuation_alpha = 0.002;
  double station_ring_km_lo = 20.0;
  double station_ring_km_hi = 140.0;
  double vertical_only_fraction = 0.2;
  // With this probability an observing station is drawn from the half of the
  // pool matched to the event class, correlating station identity with class.
  double station_class_bias = 0.7;
  std::uint64_t seed = 1;
  // Station pool identity; 0 means "derive from seed". A different pool gives
  // disjoint site filters for shifted test catalogs.
  std::uint64_t station_pool_seed = 0;

  void validate() const {
    if (n_events <= 0) throw ConfigError("SynthConfig.n_events must be positive");
    if (stations_min < 1 || stations_max < stations_min)
      throw ConfigError("SynthConfig.stations_min/stations_max invalid");
    if (n_stations < stations_max)
      throw ConfigError("SynthConfig.n_stations smaller than stations_max");
    if (sample_rate_hz <= 0) throw ConfigError("SynthConfig.sample_rate_hz must be positive");
    if (duration_s <= 0) throw ConfigError("SynthConfig.duration_s must be positive");
    const double ns = duration_s * sample_rate_hz;
    if (std::abs(ns - std::round(ns)) > 1e-9)
      throw ConfigError("SynthConfig.duration_s * sample_rate_hz must be integral");
    if (class_mix.empty() || class_mix.size() != class_templates.size())
      throw ConfigError("SynthConfig.class_mix size must match class_templates");
    const double sum = std::accumulate(class_mix.begin(), class_mix.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("SynthConfig.class_mix must sum to 1");
    if (station_ring_km_lo <= 0 || station_ring_km_hi < station_ring_km_lo)
      throw ConfigError("SynthConfig.station_ring_km range invalid");
    if (vertical_only_fraction < 0 || vertical_only_fraction > 1)
      throw ConfigError("SynthConfig.vertical_only_fraction must be in [0,1]");
    if (station_class_bias < 0 || station_class_bias > 1)
      throw ConfigError("SynthConfig.station_class_bias must be in [0,1]");
  }
};

// Band-limited transient: a handful of damped sinusoids drawn around the
// corner frequency under a rise/decay envelope, normalized to unit RMS.
inline std::vector<double> source_wavelet(const SourceSpec& spec, std::size_t n,
                                          double fs, Rng rng) {
  if (n == 0 || fs <= 0.0)
    throw UsageError("source_wavelet: require n > 0 and fs > 0");
  if (spec.corner_freq_hz <= 0.0 || spec.envelope_decay_s <= 0.0)
    throw ConfigError("SourceSpec: corner_freq_hz and envelope_decay_s must be positive");
  constexpr int kComponents = 4;
  constexpr double kRiseS = 0.15;
  std::vector<double> freqs(kComponents), phases(kComponents), amps(kComponents);
  for (int k = 0; k < kComponents; ++k) {
    freqs[k] = spec.corner_freq_hz * rng.uniform(0.85, 1.15);
    phases[k] = rng.uniform(0.0, 2.0 * M_PI);
    amps[k] = rng.uniform(0.5, 1.0);
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env =
        (1.0 - std::exp(-t / kRiseS)) * std::exp(-t / spec.envelope_decay_s);
    double v = 0.0;
    for (int k = 0; k < kComponents; ++k)
      v += amps[k] * std::sin(2.0 * M_PI * freqs[k] * t + phases[k]);
    x[i] = env * v;
  }
  double e = 0.0;
  for (double v : x) e += v * v;
  const double rms = std::sqrt(e / static_cast<double>(n));
  if (rms > 0.0)
    for (double& v : x) v /= rms;
  return x;
}

// Applies the path transform to one channel: integer-sample delay, 1/d
// spreading, exp(-alpha*f*d) attenuation in the frequency domain, site FIR,
// then Gaussian noise to meet snr_db (infinity = noiseless).
inline std::vector<double> apply_path(const std::vector<double>& src,
                                      const PathSpec& path, double fs,
                                      Rng& rng) {
  if (path.distance_km <= 0.0 || path.velocity_km_s <= 0.0)
    throw ConfigError("PathSpec: distance_km and velocity_km_s must be positive");
  const std::size_t n = src.size();
  const auto delay = static_cast<std::size_t>(
      std::llround(path.distance_km / path.velocity_km_s * fs));
  std::vector<double> x(n, 0.0);
  const double spread = 1.0 / path.distance_km;
  for (std::size_t i = delay; i < n; ++i) x[i] = spread * src[i - delay];

  if (path.attenuation_alpha > 0.0) {
    const std::size_t m = detail::next_pow2(2 * n);
    std::vector<std::complex<double>> spec(m, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) spec[i] = {x[i], 0.0};
    detail::fft(spec, false);
    for (std::size_t k = 0; k < m; ++k) {
      const double f = (k <= m / 2 ? static_cast<double>(k)
                                   : static_cast<double>(m - k)) *
                       fs / static_cast<double>(m);
      spec[k] *= std::exp(-path.attenuation_alpha * f * path.distance_km);
    }
    detail::fft(spec, true);
    for (std::size_t i = 0; i < n; ++i) x[i] = spec[i].real();
  }

  if (!(path.site_filter.size() == 1 && path.site_filter[0] == 1.0)) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const std::size_t kmax = std::min(path.site_filter.size(), i + 1);
      for (std::size_t k = 0; k < kmax; ++k)
        acc += path.site_filter[k] * x[i - k];
      y[i] = acc;
    }
    x = std::move(y);
  }

  if (std::isfinite(path.snr_db)) {
    double e = 0.0;
    for (double v : x) e += v * v;
    const double rms = std::sqrt(e / static_cast<double>(n));
    const double sigma = rms * std::pow(10.0, -path.snr_db / 20.0);
    for (double& v : x) v += sigma * rng.normal();
  }
  return x;
}

// Fixed per-station properties derived from the pool seed.
struct StationInfo {
  std::string id;
  double lat, lon;
  std::vector<double> site_filter;
  bool vertical_only;
};

inline std::vector<StationInfo> make_station_pool(const SynthConfig& cfg) {
  const std::uint64_t pool_seed =
      cfg.station_pool_seed ? cfg.station_pool_seed : cfg.seed;
  std::vector<StationInfo> pool;
  pool.reserve(cfg.n_stations);
  constexpr double kCenterLat = 40.0, kCenterLon = -110.0;
  const double km_per_deg_lat = 110.574;
  for (int i = 0; i < cfg.n_stations; ++i) {
    Rng rng = Rng(pool_seed).derive(1000 + static_cast<std::uint64_t>(i));
    StationInfo st;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "ST%03d", i);
    st.id = buf;
    const double az = rng.uniform(0.0, 2.0 * M_PI);
    const double r = rng.uniform(cfg.station_ring_km_lo, cfg.station_ring_km_hi);
    const double km_per_deg_lon = 111.320 * std::cos(kCenterLat * M_PI / 180.0);
    st.lat = kCenterLat + r * std::sin(az) / km_per_deg_lat;
    st.lon = kCenterLon + r * std::cos(az) / km_per_deg_lon;
    // Mild coloration FIR, unit energy, leading tap dominant.
    st.site_filter.resize(7);
    st.site_filter[0] = 1.0;
    for (int k = 1; k < 7; ++k) st.site_filter[k] = 0.35 * rng.normal();
    double e = 0.0;
    for (double c : st.site_filter) e += c * c;
    for (double& c : st.site_filter) c /= std::sqrt(e);
    st.vertical_only = rng.uniform() < cfg.vertical_only_fraction;
    pool.push_back(std::move(st));
  }
  return pool;
}

inline double flat_distance_km(double lat1, double lon1, double lat2,
                               double lon2) {
  const double km_per_deg_lat = 110.574;
  const double km_per_deg_lon = 111.320 * std::cos(lat1 * M_PI / 180.0);
  const double dy = (lat2 - lat1) * km_per_deg_lat;
  const double dx = (lon2 - lon1) * km_per_deg_lon;
  return std::sqrt(dx * dx + dy * dy);
}

struct SynthResult {
  EventCatalog catalog;
  std::vector<WaveformRecord> waveforms;  // aligned with catalog rows
};

// Generates a labeled multi-station catalog. Per-event RNG streams derive
// from (seed, event_index), so parallel and serial generation agree.
inline SynthResult generate_catalog(const SynthConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(
      std::llround(cfg.duration_s * cfg.sample_rate_hz));
  const auto pool = make_station_pool(cfg);
  SynthResult out;
  Rng root(cfg.seed);
  constexpr double kCenterLat = 40.0, kCenterLon = -110.0;
  for (int ev = 0; ev < cfg.n_events; ++ev) {
    Rng erng = root.derive(static_cast<std::uint64_t>(ev));
    SourceSpec spec;
    spec.class_id = static_cast<int>(erng.categorical(cfg.class_mix));
    const auto& tpl = cfg.class_templates[spec.class_id];
    spec.corner_freq_hz = erng.uniform(tpl.corner_lo, tpl.corner_hi);
    spec.envelope_decay_s = erng.uniform(tpl.decay_lo, tpl.decay_hi);
    spec.depth_km = erng.uniform(tpl.depth_lo, tpl.depth_hi);
    spec.lat = kCenterLat + erng.uniform(-0.15, 0.15);
    spec.lon = kCenterLon + erng.uniform(-0.15, 0.15);

    const int k = cfg.stations_min +
                  static_cast<int>(erng.uniform_int(
                      static_cast<std::uint64_t>(cfg.stations_max - cfg.stations_min + 1)));
    // Station choice biased toward the half of the pool matched to the class.
    std::vector<int> chosen;
    const int half = cfg.n_stations / 2;
    while (static_cast<int>(chosen.size()) < k) {
      int idx;
      const bool matched = erng.uniform() < cfg.station_class_bias;
      const bool first_half = (spec.class_id % 2 == 0) == matched;
      if (first_half)
        idx = static_cast<int>(erng.uniform_int(half));
      else
        idx = half + static_cast<int>(erng.uniform_int(cfg.n_stations - half));
      if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end())
        chosen.push_back(idx);
    }

    char evbuf[16];
    std::snprintf(evbuf, sizeof(evbuf), "ev%05d", ev);
    for (std::size_t si = 0; si < chosen.size(); ++si) {
      const auto& st = pool[chosen[si]];
      Rng srng = erng.derive(0x5a00 + si);
      PathSpec path;
      path.distance_km =
          std::max(1.0, flat_distance_km(spec.lat, spec.lon, st.lat, st.lon));
      path.velocity_km_s = cfg.velocity_km_s;
      path.attenuation_alpha = cfg.attenuation_alpha;
      path.site_filter = st.site_filter;
      path.snr_db = srng.uniform(cfg.snr_db_lo, cfg.snr_db_hi);

      WaveformRecord rec;
      rec.sample_rate_hz = cfg.sample_rate_hz;
      const bool triaxial = !st.vertical_only;
      rec.channel_mask = {true, triaxial, triaxial};
      const int nc = triaxial ? 3 : 1;
      for (int c = 0; c < 3; ++c) {
        if (c < nc) {
          auto w = source_wavelet(spec, n, cfg.sample_rate_hz,
                                  erng.derive(0xc0 + c));
          Rng nrng = srng.derive(0xe0 + c);
          rec.channels[c] = apply_path(w, path, cfg.sample_rate_hz, nrng);
          if (c > 0)
            for (double& v : rec.channels[c]) v *= 0.7;
        } else {
          rec.channels[c].assign(n, 0.0);
        }
      }

      CatalogRow row;
      row.event_id = evbuf;
      row.station_id = st.id;
      row.event_class = spec.class_id;
      row.depth_km = spec.depth_km;
      row.event_lat = spec.lat;
      row.event_lon = spec.lon;
      row.station_lat = st.lat;
      row.station_lon = st.lon;
      row.distance_km = path.distance_km;
      row.n_channels = nc;
      row.waveform_path = "waveforms/" + std::string(evbuf) + "_" + st.id + ".swf";
      out.catalog.rows.push_back(std::move(row));
      out.waveforms.push_back(std::move(rec));
    }
  }
  return out;
}

// Writes catalog CSV plus one SWF1 file per row under out_dir.
inline void write_dataset(const SynthResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "waveforms");
  for (std::size_t i = 0; i < res.catalog.rows.size(); ++i)
    save_waveform(res.waveforms[i],
                  (fs::path(out_dir) / res.catalog.rows[i].waveform_path).string());
  save_catalog(res.catalog, (fs::path(out_dir) / "catalog.csv").string());
}

}  // namespace seisbt
