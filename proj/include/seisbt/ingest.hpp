#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seisbt/errors.hpp"
#include "seisbt/rng.hpp"
#include "seisbt/types.hpp"

namespace seisbt {

inline constexpr char kCatalogHeader[] =
    "event_id,station_id,event_class,depth_km,event_lat,event_lon,"
    "station_lat,station_lon,distance_km,n_channels,waveform_path";

// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2))
    throw FormatError("waveform file truncated in header");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("waveform file truncated in header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

// --- SWF1 waveform binary ---------------------------------------------------
// magic "SWF1"; u16 LE version=1; u16 n_channels; u32 n_samples;
// f64 sample_rate_hz; channel-major f32 LE samples.

inline void save_waveform(const WaveformRecord& rec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("SWF1", 4);
  detail::put_u16(os, 1);
  detail::put_u16(os, static_cast<std::uint16_t>(rec.n_channels()));
  detail::put_u32(os, static_cast<std::uint32_t>(rec.n_samples()));
  double sr = rec.sample_rate_hz;
  os.write(reinterpret_cast<const char*>(&sr), 8);
  const int nc = rec.n_channels();
  for (int c = 0; c < nc; ++c) {
    for (double x : rec.channels[c]) {
      float f = static_cast<float>(x);
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

inline WaveformRecord load_waveform(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open waveform file: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SWF1", 4) != 0)
    throw FormatError("bad magic, expected SWF1: " + path);
  const std::uint16_t version = detail::get_u16(is);
  if (version != 1)
    throw FormatError("unsupported SWF1 version " + std::to_string(version) +
                      ": " + path);
  const std::uint16_t nc = detail::get_u16(is);
  const std::uint32_t ns = detail::get_u32(is);
  if (nc != 1 && nc != 3)
    throw FormatError("n_channels must be 1 or 3, got " + std::to_string(nc) +
                      ": " + path);
  WaveformRecord rec;
  if (!is.read(reinterpret_cast<char*>(&rec.sample_rate_hz), 8))
    throw FormatError("waveform file truncated in header: " + path);
  rec.channel_mask = {true, nc == 3, nc == 3};
  for (int c = 0; c < 3; ++c) rec.channels[c].assign(ns, 0.0);
  for (int c = 0; c < nc; ++c) {
    for (std::uint32_t i = 0; i < ns; ++i) {
      float f;
      if (!is.read(reinterpret_cast<char*>(&f), 4))
        throw FormatError("waveform payload truncated: " + path);
      rec.channels[c][i] = f;
    }
  }
  return rec;
}

// --- Catalog CSV ------------------------------------------------------------

inline void save_catalog(const EventCatalog& cat, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << kCatalogHeader << "\n";
  for (const auto& r : cat.rows) {
    os << r.event_id << ',' << r.station_id << ',' << r.event_class << ','
       << fmt_double(r.depth_km) << ',' << fmt_double(r.event_lat) << ','
       << fmt_double(r.event_lon) << ',' << fmt_double(r.station_lat) << ','
       << fmt_double(r.station_lon) << ',' << fmt_double(r.distance_km) << ','
       << r.n_channels << ',' << r.waveform_path << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

// Loads and validates a catalog. waveform_path entries are resolved relative
// to the CSV's directory; with check_waveforms each referenced file's header
// is opened and its channel count compared against the row.
inline EventCatalog load_catalog(const std::string& path,
                                 bool check_waveforms = true) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open catalog: " + path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty catalog file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCatalogHeader)
    throw FormatError("catalog header mismatch in " + path + ": got '" + line +
                      "'");
  const auto base = std::filesystem::path(path).parent_path();
  EventCatalog cat;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (line.back() == ',') f.push_back("");
    if (f.size() != 11)
      throw FormatError("catalog row " + std::to_string(lineno) + ": expected 11 fields, got " +
                        std::to_string(f.size()));
    CatalogRow r;
    try {
      r.event_id = f[0];
      r.station_id = f[1];
      r.event_class = std::stoi(f[2]);
      r.depth_km = std::stod(f[3]);
      r.event_lat = std::stod(f[4]);
      r.event_lon = std::stod(f[5]);
      r.station_lat = std::stod(f[6]);
      r.station_lon = std::stod(f[7]);
      r.distance_km = std::stod(f[8]);
      r.n_channels = std::stoi(f[9]);
      r.waveform_path = f[10];
    } catch (const std::exception&) {
      throw FormatError("catalog row " + std::to_string(lineno) +
                        ": unparseable numeric field");
    }
    if (r.n_channels != 1 && r.n_channels != 3)
      throw FormatError("catalog row " + std::to_string(lineno) +
                        ": n_channels must be 1 or 3");
    if (!seen.insert({r.event_id, r.station_id}).second)
      throw FormatError("catalog row " + std::to_string(lineno) +
                        ": duplicate (event_id, station_id) = (" + r.event_id +
                        ", " + r.station_id + ")");
    if (check_waveforms) {
      const auto wpath = (base / r.waveform_path).string();
      WaveformRecord rec;
      try {
        rec = load_waveform(wpath);
      } catch (const Error& e) {
        throw FormatError("catalog row " + std::to_string(lineno) +
                          ": waveform_path: " + e.what());
      }
      if (rec.n_channels() != r.n_channels)
        throw FormatError("catalog row " + std::to_string(lineno) +
                          ": n_channels=" + std::to_string(r.n_channels) +
                          " but waveform has " +
                          std::to_string(rec.n_channels()));
    }
    cat.rows.push_back(std::move(r));
  }
  return cat;
}

// --- Event-ID partitioning --------------------------------------------------

struct Split {
  std::vector<std::string> train, validation, test;
};

inline std::vector<std::string> event_ids_in_order(const EventCatalog& cat) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& r : cat.rows)
    if (seen.insert(r.event_id).second) ids.push_back(r.event_id);
  return ids;
}

// Shuffles event ids by seeded RNG, then slices by cumulative ratios:
// floor counts for train and validation, remainder to test.
inline Split partition(const EventCatalog& cat,
                       const std::array<double, 3>& ratios,
                       std::uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  for (double r : ratios)
    if (r < 0.0) throw ConfigError("partition: ratios must be nonnegative");
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("partition: ratios must sum to 1");
  auto ids = event_ids_in_order(cat);
  const bool all_positive = ratios[0] > 0 && ratios[1] > 0 && ratios[2] > 0;
  if (all_positive && ids.size() < 3)
    throw UsageError("partition: need at least 3 events for 3 nonempty parts");
  Rng rng(seed);
  rng.shuffle(ids);
  const std::size_t n = ids.size();
  const auto n_train = static_cast<std::size_t>(ratios[0] * n);
  const auto n_val = static_cast<std::size_t>(ratios[1] * n);
  Split s;
  s.train.assign(ids.begin(), ids.begin() + n_train);
  s.validation.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  s.test.assign(ids.begin() + n_train + n_val, ids.end());
  return s;
}

}  // namespace seisbt
