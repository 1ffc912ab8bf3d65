#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "seisbt/dsp.hpp"

using namespace seisbt;

namespace {

WaveformRecord triaxial_noise(std::size_t n, std::uint64_t seed) {
  WaveformRecord rec;
  rec.sample_rate_hz = 40.0;
  Rng rng(seed);
  for (int c = 0; c < 3; ++c) {
    rec.channels[c].assign(n, 0.0);
    for (auto& v : rec.channels[c]) v = rng.normal();
  }
  return rec;
}

}  // namespace

TEST_CASE("default framing gives F=65, T=28 for 3600 samples", "[dsp]") {
  auto rec = triaxial_noise(3600, 1);
  const auto s = spectrogram(rec, StftConfig{});
  REQUIRE(s.n_freq == 65);
  REQUIRE(s.n_time == 28);
  REQUIRE(s.tensor.size() == 3u * 65 * 28);
}

TEST_CASE("spectrogram output is normalized to [0,1] with full range hit", "[dsp]") {
  auto rec = triaxial_noise(2048, 2);
  const auto s = spectrogram(rec, StftConfig{});
  double lo = 1e9, hi = -1e9;
  for (double v : s.tensor) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  REQUIRE(lo == 0.0);
  REQUIRE(hi == 1.0);
}

TEST_CASE("all-zero input maps to the all-zero tensor", "[dsp]") {
  WaveformRecord rec;
  rec.sample_rate_hz = 40.0;
  for (auto& ch : rec.channels) ch.assign(512, 0.0);
  const auto s = spectrogram(rec, StftConfig{});
  for (double v : s.tensor) REQUIRE(v == 0.0);
}

TEST_CASE("bin-center sinusoid peaks at its own bin", "[dsp]") {
  StftConfig cfg;
  const double fs = 40.0;
  const int k = 12;  // bin-center frequency k*fs/nperseg
  const double f0 = k * fs / cfg.nperseg;
  WaveformRecord rec;
  rec.sample_rate_hz = fs;
  rec.channel_mask = {true, false, false};
  for (auto& ch : rec.channels) ch.assign(2560, 0.0);
  for (std::size_t i = 0; i < 2560; ++i)
    rec.channels[0][i] = std::sin(2.0 * M_PI * f0 * i / fs);
  const auto s = spectrogram(rec, cfg);
  std::vector<double> mean_spec(s.n_freq, 0.0);
  for (int f = 0; f < s.n_freq; ++f)
    for (int t = 0; t < s.n_time; ++t) mean_spec[f] += s.at(0, f, t);
  int best = 0;
  for (int f = 1; f < s.n_freq; ++f)
    if (mean_spec[f] > mean_spec[best]) best = f;
  REQUIRE(best == k);
}

TEST_CASE("masked channels are exactly zero after preprocessing", "[dsp]") {
  auto rec = triaxial_noise(1024, 3);
  rec.channel_mask = {true, false, false};
  rec.channels[1].assign(1024, 0.0);
  rec.channels[2].assign(1024, 0.0);
  const auto s = spectrogram(rec, StftConfig{});
  const std::size_t plane = static_cast<std::size_t>(s.n_freq) * s.n_time;
  for (std::size_t i = plane; i < s.tensor.size(); ++i) REQUIRE(s.tensor[i] == 0.0);
}

TEST_CASE("record shorter than one frame raises a DSP error", "[dsp]") {
  auto rec = triaxial_noise(100, 4);
  REQUIRE_THROWS_AS(spectrogram(rec, StftConfig{}), DspError);
}

TEST_CASE("log-normalization preserves power ordering", "[dsp]") {
  auto rec = triaxial_noise(2048, 5);
  StftConfig cfg;
  int F, T;
  const auto p = stft_power(rec.channels[0], cfg, F, T);
  const auto s = spectrogram(rec, cfg);
  for (int i = 0; i < 200; ++i) {
    const std::size_t a = static_cast<std::size_t>(i * 7) % p.size();
    const std::size_t b = static_cast<std::size_t>(i * 13 + 1) % p.size();
    if (p[a] < p[b]) REQUIRE(s.tensor[a] <= s.tensor[b]);
  }
}

TEST_CASE("augment_noise with sigma 0 is the identity", "[dsp]") {
  auto rec = triaxial_noise(1024, 6);
  const auto s = spectrogram(rec, StftConfig{});
  Rng rng(1);
  const auto out = augment_noise(s, 0.0, rng);
  REQUIRE(out.tensor == s.tensor);
}

TEST_CASE("augment_noise keeps masked channels at exact zero", "[dsp]") {
  auto rec = triaxial_noise(1024, 7);
  rec.channel_mask = {true, false, false};
  rec.channels[1].assign(1024, 0.0);
  rec.channels[2].assign(1024, 0.0);
  const auto s = spectrogram(rec, StftConfig{});
  Rng rng(2);
  const auto out = augment_noise(s, 0.5, rng);
  const std::size_t plane = static_cast<std::size_t>(s.n_freq) * s.n_time;
  for (std::size_t i = plane; i < out.tensor.size(); ++i) REQUIRE(out.tensor[i] == 0.0);
}

TEST_CASE("augment_noise empirical std matches sigma on unclamped entries", "[dsp]") {
  auto rec = triaxial_noise(3600, 8);
  const auto s = spectrogram(rec, StftConfig{});
  Rng rng(3);
  const double sigma = 0.1;
  const auto out = augment_noise(s, sigma, rng);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.tensor.size(); ++i) {
    if (out.tensor[i] <= 0.0 || out.tensor[i] >= 1.0) continue;  // clamped
    const double d = out.tensor[i] - s.tensor[i];
    sum += d;
    sum2 += d * d;
    ++n;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum2 / n - mean * mean);
  REQUIRE(std == Catch::Approx(sigma).margin(0.01));
}

TEST_CASE("zero_pad_horizontals zeroes channels 1,2 and is idempotent", "[dsp]") {
  auto rec = triaxial_noise(1024, 9);
  const auto s = spectrogram(rec, StftConfig{});
  const auto padded = zero_pad_horizontals(s);
  const std::size_t plane = static_cast<std::size_t>(s.n_freq) * s.n_time;
  for (std::size_t i = 0; i < plane; ++i) REQUIRE(padded.tensor[i] == s.tensor[i]);
  for (std::size_t i = plane; i < padded.tensor.size(); ++i)
    REQUIRE(padded.tensor[i] == 0.0);
  REQUIRE_FALSE(padded.channel_mask[1]);
  REQUIRE(padded.meta.n_channels == 1);
  const auto twice = zero_pad_horizontals(padded);
  REQUIRE(twice.tensor == padded.tensor);
  REQUIRE(twice.channel_mask == padded.channel_mask);
}
