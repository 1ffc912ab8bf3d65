#pragma once

#include <cmath>
#include <vector>

#include "seisbt/errors.hpp"

namespace seisbt {

// Cross-correlation matrix between two batch-standardized views.
struct CrossCorrelation {
  int dim = 0;
  int batch_size = 0;
  std::vector<double> c;  // dim x dim row-major
  std::vector<double> mean_a, std_a, mean_b, std_b;
  std::vector<bool> degenerate_a, degenerate_b;  // std floored columns

  double at(int i, int j) const { return c[static_cast<std::size_t>(i) * dim + j]; }
};

struct BtLossValue {
  double total = 0.0;
  double invariance_term = 0.0;
  double redundancy_term = 0.0;
  double lambda = 0.0;
};

inline constexpr double kStdFloor = 1e-12;

namespace detail {

// Column statistics with population (1/B) variance; std floored at kStdFloor.
inline void column_stats(const std::vector<double>& z, int B, int D,
                         std::vector<double>& mean, std::vector<double>& stdev,
                         std::vector<bool>& degenerate) {
  mean.assign(D, 0.0);
  stdev.assign(D, 0.0);
  degenerate.assign(D, false);
  for (int b = 0; b < B; ++b)
    for (int d = 0; d < D; ++d) mean[d] += z[static_cast<std::size_t>(b) * D + d];
  for (int d = 0; d < D; ++d) mean[d] /= B;
  for (int b = 0; b < B; ++b)
    for (int d = 0; d < D; ++d) {
      const double c = z[static_cast<std::size_t>(b) * D + d] - mean[d];
      stdev[d] += c * c;
    }
  for (int d = 0; d < D; ++d) {
    stdev[d] = std::sqrt(stdev[d] / B);
    if (stdev[d] < kStdFloor) {
      stdev[d] = kStdFloor;
      degenerate[d] = true;
    }
  }
}

inline std::vector<double> standardize(const std::vector<double>& z, int B, int D,
                                       const std::vector<double>& mean,
                                       const std::vector<double>& stdev) {
  std::vector<double> out(z.size());
  for (int b = 0; b < B; ++b)
    for (int d = 0; d < D; ++d) {
      const std::size_t i = static_cast<std::size_t>(b) * D + d;
      out[i] = (z[i] - mean[d]) / stdev[d];
    }
  return out;
}

}  // namespace detail

// C_ij = (1/B) sum_b zhatA_{b,i} zhatB_{b,j} after per-view, per-column
// standardization over the batch.
inline CrossCorrelation cross_correlation(const std::vector<double>& za,
                                          const std::vector<double>& zb, int B,
                                          int D) {
  if (B < 2) throw UsageError("cross_correlation: batch size must be >= 2");
  if (za.size() != static_cast<std::size_t>(B) * D || zb.size() != za.size())
    throw UsageError("cross_correlation: view shape mismatch");
  CrossCorrelation cc;
  cc.dim = D;
  cc.batch_size = B;
  detail::column_stats(za, B, D, cc.mean_a, cc.std_a, cc.degenerate_a);
  detail::column_stats(zb, B, D, cc.mean_b, cc.std_b, cc.degenerate_b);
  const auto ha = detail::standardize(za, B, D, cc.mean_a, cc.std_a);
  const auto hb = detail::standardize(zb, B, D, cc.mean_b, cc.std_b);
  cc.c.assign(static_cast<std::size_t>(D) * D, 0.0);
  for (int b = 0; b < B; ++b) {
    const double* ra = ha.data() + static_cast<std::size_t>(b) * D;
    const double* rb = hb.data() + static_cast<std::size_t>(b) * D;
    for (int i = 0; i < D; ++i) {
      const double v = ra[i];
      double* row = cc.c.data() + static_cast<std::size_t>(i) * D;
      for (int j = 0; j < D; ++j) row[j] += v * rb[j];
    }
  }
  for (auto& v : cc.c) v /= B;
  return cc;
}

// Invariance term sum_i (1-C_ii)^2 plus lambda times the off-diagonal
// redundancy term sum_{i != j} C_ij^2.
inline BtLossValue bt_loss(const CrossCorrelation& cc, double lambda) {
  BtLossValue v;
  v.lambda = lambda;
  const int D = cc.dim;
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      const double c = cc.at(i, j);
      if (i == j)
        v.invariance_term += (1.0 - c) * (1.0 - c);
      else
        v.redundancy_term += c * c;
    }
  }
  v.total = v.invariance_term + lambda * v.redundancy_term;
  return v;
}

inline BtLossValue bt_loss(const std::vector<double>& c_matrix, int D, double lambda) {
  if (c_matrix.size() != static_cast<std::size_t>(D) * D)
    throw UsageError("bt_loss: matrix must be square DxD");
  CrossCorrelation cc;
  cc.dim = D;
  cc.c = c_matrix;
  return bt_loss(cc, lambda);
}

struct BtGradients {
  BtLossValue loss;
  CrossCorrelation cc;
  std::vector<double> grad_a, grad_b;  // B x D each
};

// Exact gradient of bt_loss(cross_correlation(za, zb), lambda) w.r.t. both
// views, chained through the per-column standardization. Columns whose std
// was floored are treated as having a constant scale (no variance path).
inline BtGradients bt_loss_backward(const std::vector<double>& za,
                                    const std::vector<double>& zb, int B, int D,
                                    double lambda) {
  BtGradients out;
  out.cc = cross_correlation(za, zb, B, D);
  out.loss = bt_loss(out.cc, lambda);

  // dL/dC
  std::vector<double> gc(static_cast<std::size_t>(D) * D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      const double c = out.cc.at(i, j);
      gc[static_cast<std::size_t>(i) * D + j] =
          (i == j) ? -2.0 * (1.0 - c) : 2.0 * lambda * c;
    }

  const auto ha = detail::standardize(za, B, D, out.cc.mean_a, out.cc.std_a);
  const auto hb = detail::standardize(zb, B, D, out.cc.mean_b, out.cc.std_b);

  // dL/dzhatA_{b,i} = (1/B) sum_j gc_ij zhatB_{b,j}; symmetric for B view.
  std::vector<double> gha(ha.size(), 0.0), ghb(hb.size(), 0.0);
  for (int b = 0; b < B; ++b) {
    const double* rb = hb.data() + static_cast<std::size_t>(b) * D;
    const double* ra = ha.data() + static_cast<std::size_t>(b) * D;
    double* ga = gha.data() + static_cast<std::size_t>(b) * D;
    double* gb = ghb.data() + static_cast<std::size_t>(b) * D;
    for (int i = 0; i < D; ++i) {
      const double* row = gc.data() + static_cast<std::size_t>(i) * D;
      double acc = 0.0;
      for (int j = 0; j < D; ++j) {
        acc += row[j] * rb[j];
        gb[j] += row[j] * ra[i];
      }
      ga[i] += acc;
    }
  }
  for (auto& v : gha) v /= B;
  for (auto& v : ghb) v /= B;

  // Chain through standardization, column by column.
  auto chain = [B, D](const std::vector<double>& gh, const std::vector<double>& h,
                      const std::vector<double>& stdev,
                      const std::vector<bool>& degenerate) {
    std::vector<double> gz(gh.size());
    for (int d = 0; d < D; ++d) {
      double mg = 0.0, mgh = 0.0;
      for (int b = 0; b < B; ++b) {
        const std::size_t i = static_cast<std::size_t>(b) * D + d;
        mg += gh[i];
        mgh += gh[i] * h[i];
      }
      mg /= B;
      mgh /= B;
      for (int b = 0; b < B; ++b) {
        const std::size_t i = static_cast<std::size_t>(b) * D + d;
        if (degenerate[d])
          gz[i] = (gh[i] - mg) / stdev[d];
        else
          gz[i] = (gh[i] - mg - h[i] * mgh) / stdev[d];
      }
    }
    return gz;
  };
  out.grad_a = chain(gha, ha, out.cc.std_a, out.cc.degenerate_a);
  out.grad_b = chain(ghb, hb, out.cc.std_b, out.cc.degenerate_b);
  return out;
}

}  // namespace seisbt
