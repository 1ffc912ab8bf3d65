#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "seisbt/ingest.hpp"
#include "seisbt/synth.hpp"

using namespace seisbt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("seisbt_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

WaveformRecord make_record(int nc, std::size_t n) {
  WaveformRecord rec;
  rec.sample_rate_hz = 40.0;
  rec.channel_mask = {true, nc == 3, nc == 3};
  Rng rng(7);
  for (int c = 0; c < 3; ++c) {
    rec.channels[c].assign(n, 0.0);
    if (c < nc)
      for (auto& v : rec.channels[c]) v = rng.normal();
  }
  return rec;
}

}  // namespace

TEST_CASE("waveform round trip is bit identical in f32", "[ingest]") {
  auto dir = temp_dir("wf_roundtrip");
  auto rec = make_record(3, 256);
  // force representable f32 values so equality is exact
  for (auto& ch : rec.channels)
    for (auto& v : ch) v = static_cast<float>(v);
  const auto path = (dir / "a.swf").string();
  save_waveform(rec, path);
  const auto back = load_waveform(path);
  REQUIRE(back.sample_rate_hz == rec.sample_rate_hz);
  REQUIRE(back.n_channels() == 3);
  REQUIRE(back.n_samples() == 256);
  for (int c = 0; c < 3; ++c) REQUIRE(back.channels[c] == rec.channels[c]);
}

TEST_CASE("single-channel waveform marks horizontals absent", "[ingest]") {
  auto dir = temp_dir("wf_1ch");
  auto rec = make_record(1, 128);
  const auto path = (dir / "v.swf").string();
  save_waveform(rec, path);
  const auto back = load_waveform(path);
  REQUIRE(back.n_channels() == 1);
  REQUIRE_FALSE(back.channel_mask[1]);
  REQUIRE_FALSE(back.channel_mask[2]);
  for (double v : back.channels[1]) REQUIRE(v == 0.0);
}

TEST_CASE("truncated waveform file raises a format error", "[ingest]") {
  auto dir = temp_dir("wf_trunc");
  auto rec = make_record(3, 128);
  const auto path = (dir / "t.swf").string();
  save_waveform(rec, path);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 10);
  REQUIRE_THROWS_AS(load_waveform(path), FormatError);
}

TEST_CASE("bad magic and bad version are rejected", "[ingest]") {
  auto dir = temp_dir("wf_magic");
  const auto path = (dir / "bad.swf").string();
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE" << std::string(32, '\0');
  }
  REQUIRE_THROWS_AS(load_waveform(path), FormatError);
}

TEST_CASE("catalog write-then-load round trips", "[ingest]") {
  auto dir = temp_dir("cat_roundtrip");
  SynthConfig cfg;
  cfg.n_events = 6;
  cfg.duration_s = 10.0;
  auto res = generate_catalog(cfg);
  write_dataset(res, dir.string());
  const auto cat = load_catalog((dir / "catalog.csv").string());
  REQUIRE(cat.rows.size() == res.catalog.rows.size());
  for (std::size_t i = 0; i < cat.rows.size(); ++i) {
    const auto& a = cat.rows[i];
    const auto& b = res.catalog.rows[i];
    REQUIRE(a.event_id == b.event_id);
    REQUIRE(a.station_id == b.station_id);
    REQUIRE(a.event_class == b.event_class);
    REQUIRE(a.depth_km == b.depth_km);
    REQUIRE(a.distance_km == b.distance_km);
    REQUIRE(a.n_channels == b.n_channels);
    REQUIRE(a.waveform_path == b.waveform_path);
  }
}

TEST_CASE("duplicate (event_id, station_id) is rejected by name", "[ingest]") {
  auto dir = temp_dir("cat_dup");
  auto rec = make_record(3, 128);
  save_waveform(rec, (dir / "w.swf").string());
  std::ofstream os(dir / "catalog.csv");
  os << kCatalogHeader << "\n";
  os << "ev1,STA,0,5,40,-110,40.1,-110.1,15,3,w.swf\n";
  os << "ev1,STA,0,5,40,-110,40.1,-110.1,15,3,w.swf\n";
  os.close();
  REQUIRE_THROWS_WITH(load_catalog((dir / "catalog.csv").string()),
                      Catch::Matchers::ContainsSubstring("ev1"));
}

TEST_CASE("header mismatch and dangling waveform path fail loading", "[ingest]") {
  auto dir = temp_dir("cat_bad");
  {
    std::ofstream os(dir / "wrong_header.csv");
    os << "event_id,station\n";
  }
  REQUIRE_THROWS_AS(load_catalog((dir / "wrong_header.csv").string()), FormatError);
  {
    std::ofstream os(dir / "dangling.csv");
    os << kCatalogHeader << "\n";
    os << "ev1,STA,0,5,40,-110,40.1,-110.1,15,3,missing.swf\n";
  }
  REQUIRE_THROWS_AS(load_catalog((dir / "dangling.csv").string()), FormatError);
}

TEST_CASE("partition sizes follow the 80/10/10 rule", "[ingest]") {
  EventCatalog cat;
  for (int i = 0; i < 100; ++i) {
    CatalogRow r;
    r.event_id = "ev" + std::to_string(i);
    r.station_id = "S";
    cat.rows.push_back(r);
  }
  const auto s = partition(cat, {0.8, 0.1, 0.1}, 3);
  REQUIRE(s.train.size() == 80);
  REQUIRE(s.validation.size() == 10);
  REQUIRE(s.test.size() == 10);
}

TEST_CASE("partition with ratios (1,0,0) puts everything in train", "[ingest]") {
  EventCatalog cat;
  for (int i = 0; i < 7; ++i) {
    CatalogRow r;
    r.event_id = "e" + std::to_string(i);
    cat.rows.push_back(r);
  }
  const auto s = partition(cat, {1.0, 0.0, 0.0}, 1);
  REQUIRE(s.train.size() == 7);
  REQUIRE(s.validation.empty());
  REQUIRE(s.test.empty());
}

TEST_CASE("partition is deterministic and disjoint over seeds", "[ingest]") {
  EventCatalog cat;
  for (int i = 0; i < 23; ++i) {
    CatalogRow r;
    r.event_id = "e" + std::to_string(i);
    cat.rows.push_back(r);
  }
  const auto a = partition(cat, {0.8, 0.1, 0.1}, 42);
  const auto b = partition(cat, {0.8, 0.1, 0.1}, 42);
  REQUIRE(a.train == b.train);
  REQUIRE(a.validation == b.validation);
  REQUIRE(a.test == b.test);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = partition(cat, {0.6, 0.2, 0.2}, seed);
    std::set<std::string> all;
    for (const auto& part : {s.train, s.validation, s.test})
      for (const auto& id : part) REQUIRE(all.insert(id).second);
    REQUIRE(all.size() == 23);
  }
}

TEST_CASE("partition rejects tiny catalogs when all ratios positive", "[ingest]") {
  EventCatalog cat;
  CatalogRow r;
  r.event_id = "only";
  cat.rows.push_back(r);
  REQUIRE_THROWS_AS(partition(cat, {0.8, 0.1, 0.1}, 1), UsageError);
}
