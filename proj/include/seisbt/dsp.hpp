#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "seisbt/errors.hpp"
#include "seisbt/rng.hpp"
#include "seisbt/types.hpp"

namespace seisbt {

namespace detail {

// In-place iterative radix-2 FFT. Length must be a power of two.
inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw UsageError("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Tukey (tapered cosine) window of length n.
inline std::vector<double> tukey_window(int n, double alpha) {
  std::vector<double> w(n, 1.0);
  if (alpha <= 0.0) return w;
  const double edge = alpha * (n - 1) / 2.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    if (x < edge) {
      w[i] = 0.5 * (1.0 + std::cos(M_PI * (x / edge - 1.0)));
    } else if (x > (n - 1) - edge) {
      w[i] = 0.5 * (1.0 + std::cos(M_PI * ((x - (n - 1)) / edge + 1.0)));
    }
  }
  return w;
}

}  // namespace detail

struct StftConfig {
  int nperseg = 128;
  int noverlap = 0;
  double tukey_alpha = 0.25;
  double log_epsilon = 1e-10;

  void validate() const {
    if (nperseg <= 0 || noverlap < 0 || noverlap >= nperseg)
      throw ConfigError("StftConfig: require nperseg > noverlap >= 0");
    if (log_epsilon <= 0.0)
      throw ConfigError("StftConfig: log_epsilon must be positive");
    if ((nperseg & (nperseg - 1)) != 0)
      throw ConfigError("StftConfig: nperseg must be a power of two");
  }
};

// Magnitude-squared STFT of one channel; frames[f][t], one-sided bins.
inline std::vector<double> stft_power(const std::vector<double>& x,
                                      const StftConfig& cfg, int& n_freq,
                                      int& n_time) {
  const int hop = cfg.nperseg - cfg.noverlap;
  n_freq = cfg.nperseg / 2 + 1;
  n_time = static_cast<int>((x.size() - cfg.noverlap) / hop);
  const auto win = detail::tukey_window(cfg.nperseg, cfg.tukey_alpha);
  std::vector<double> out(static_cast<std::size_t>(n_freq) * n_time, 0.0);
  std::vector<std::complex<double>> frame(cfg.nperseg);
  for (int t = 0; t < n_time; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < cfg.nperseg; ++i)
      frame[i] = {x[off + i] * win[i], 0.0};
    detail::fft(frame, false);
    for (int f = 0; f < n_freq; ++f)
      out[static_cast<std::size_t>(f) * n_time + t] = std::norm(frame[f]);
  }
  return out;
}

// Converts a record to a normalized log-power spectrogram tensor. The log
// tensor is min-max scaled to [0,1] jointly over the present channels;
// masked channels are written as zeros. Constant input maps to all zeros.
inline SpectrogramSample spectrogram(const WaveformRecord& rec,
                                     const StftConfig& cfg,
                                     const CatalogRow& meta = {}) {
  cfg.validate();
  if (rec.n_samples() < static_cast<std::size_t>(cfg.nperseg))
    throw DspError("spectrogram: record shorter than one frame");
  SpectrogramSample s;
  s.channel_mask = rec.channel_mask;
  s.meta = meta;
  int F = 0, T = 0;
  std::array<std::vector<double>, 3> logpow;
  for (int c = 0; c < 3; ++c) {
    if (!rec.channel_mask[c]) continue;
    auto p = stft_power(rec.channels[c], cfg, F, T);
    for (auto& v : p) v = std::log(v + cfg.log_epsilon);
    logpow[c] = std::move(p);
  }
  s.n_freq = F;
  s.n_time = T;
  s.tensor.assign(3 * static_cast<std::size_t>(F) * T, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 3; ++c) {
    if (!rec.channel_mask[c]) continue;
    for (double v : logpow[c]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double range = hi - lo;
  if (range > 0.0) {
    for (int c = 0; c < 3; ++c) {
      if (!rec.channel_mask[c]) continue;
      const std::size_t base = static_cast<std::size_t>(c) * F * T;
      for (std::size_t i = 0; i < logpow[c].size(); ++i)
        s.tensor[base + i] = (logpow[c][i] - lo) / range;
    }
  }
  return s;
}

// Adds i.i.d. Gaussian(0, sigma^2) to present-channel entries, clamped to
// [0,1]. Masked channels stay zero; metadata unchanged.
inline SpectrogramSample augment_noise(const SpectrogramSample& in,
                                       double sigma, Rng& rng) {
  if (sigma < 0.0) throw UsageError("augment_noise: sigma must be >= 0");
  SpectrogramSample out = in;
  if (sigma == 0.0) return out;
  const std::size_t plane = static_cast<std::size_t>(in.n_freq) * in.n_time;
  for (int c = 0; c < 3; ++c) {
    if (!in.channel_mask[c]) continue;
    const std::size_t base = static_cast<std::size_t>(c) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      double v = out.tensor[base + i] + sigma * rng.normal();
      out.tensor[base + i] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

// Zeroes the horizontal channels and marks the sample vertical-only.
inline SpectrogramSample zero_pad_horizontals(const SpectrogramSample& in) {
  SpectrogramSample out = in;
  const std::size_t plane = static_cast<std::size_t>(in.n_freq) * in.n_time;
  std::fill(out.tensor.begin() + plane, out.tensor.end(), 0.0);
  out.channel_mask = {true, false, false};
  out.meta.n_channels = 1;
  return out;
}

}  // namespace seisbt
