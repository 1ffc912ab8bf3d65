#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seisbt/errors.hpp"
#include "seisbt/rng.hpp"

namespace seisbt {

struct ArchitectureDescriptor {
  int in_channels = 3;
  int in_f = 65;
  int in_t = 28;
  std::vector<int> conv_channels{16, 32, 64, 128};
  int embedding_dim = 28;
  int projection_dim = 512;
  int head_hidden = 128;
  int n_classes = 2;
};

// Named parameter vector with its gradient accumulator.
struct ParamBlock {
  std::string name;
  std::vector<double> w;
  std::vector<double> g;
};

using ParamVisitor = std::function<void(ParamBlock&)>;

inline void check_finite(const std::vector<double>& v, const char* where) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + where);
}

// ---------------------------------------------------------------------------
// Layers. Each caches what its backward pass needs from the last forward.
// ---------------------------------------------------------------------------

struct Conv3x3 {
  int in_c = 0, out_c = 0;
  ParamBlock weight, bias;
  std::vector<double> x_cache;
  int B = 0, H = 0, W = 0;

  void init(const std::string& name, int in_channels, int out_channels, Rng& rng) {
    in_c = in_channels;
    out_c = out_channels;
    weight.name = name + ".w";
    bias.name = name + ".b";
    weight.w.resize(static_cast<std::size_t>(out_c) * in_c * 9);
    bias.w.assign(out_c, 0.0);
    const double scale = std::sqrt(2.0 / (in_c * 9));
    for (auto& v : weight.w) v = scale * rng.normal();
    weight.g.assign(weight.w.size(), 0.0);
    bias.g.assign(bias.w.size(), 0.0);
  }

  std::vector<double> forward(const std::vector<double>& x, int batch, int h, int w) {
    if (x.size() != static_cast<std::size_t>(batch) * in_c * h * w)
      throw UsageError("Conv3x3 " + weight.name + ": input size mismatch");
    B = batch; H = h; W = w;
    x_cache = x;
    std::vector<double> y(static_cast<std::size_t>(B) * out_c * H * W);
    for (int b = 0; b < B; ++b) {
      for (int oc = 0; oc < out_c; ++oc) {
        double* out = y.data() + (static_cast<std::size_t>(b) * out_c + oc) * H * W;
        std::fill(out, out + static_cast<std::size_t>(H) * W, bias.w[oc]);
        for (int ic = 0; ic < in_c; ++ic) {
          const double* im = x.data() + (static_cast<std::size_t>(b) * in_c + ic) * H * W;
          const double* k = weight.w.data() + (static_cast<std::size_t>(oc) * in_c + ic) * 9;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const double kv = k[(dy + 1) * 3 + (dx + 1)];
              const int i0 = std::max(0, -dy), i1 = std::min(H, H - dy);
              const int j0 = std::max(0, -dx), j1 = std::min(W, W - dx);
              for (int i = i0; i < i1; ++i) {
                const double* src = im + static_cast<std::size_t>(i + dy) * W + dx;
                double* dst = out + static_cast<std::size_t>(i) * W;
                for (int j = j0; j < j1; ++j) dst[j] += kv * src[j];
              }
            }
          }
        }
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) {
    std::vector<double> gx(static_cast<std::size_t>(B) * in_c * H * W, 0.0);
    for (int b = 0; b < B; ++b) {
      for (int oc = 0; oc < out_c; ++oc) {
        const double* go = gy.data() + (static_cast<std::size_t>(b) * out_c + oc) * H * W;
        double acc = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) acc += go[i];
        bias.g[oc] += acc;
        for (int ic = 0; ic < in_c; ++ic) {
          const double* im = x_cache.data() + (static_cast<std::size_t>(b) * in_c + ic) * H * W;
          double* gim = gx.data() + (static_cast<std::size_t>(b) * in_c + ic) * H * W;
          const double* k = weight.w.data() + (static_cast<std::size_t>(oc) * in_c + ic) * 9;
          double* gk = weight.g.data() + (static_cast<std::size_t>(oc) * in_c + ic) * 9;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const double kv = k[(dy + 1) * 3 + (dx + 1)];
              double gkv = 0.0;
              const int i0 = std::max(0, -dy), i1 = std::min(H, H - dy);
              const int j0 = std::max(0, -dx), j1 = std::min(W, W - dx);
              for (int i = i0; i < i1; ++i) {
                const double* src = im + static_cast<std::size_t>(i + dy) * W + dx;
                double* gsrc = gim + static_cast<std::size_t>(i + dy) * W + dx;
                const double* go_row = go + static_cast<std::size_t>(i) * W;
                for (int j = j0; j < j1; ++j) {
                  gkv += src[j] * go_row[j];
                  gsrc[j] += kv * go_row[j];
                }
              }
              gk[(dy + 1) * 3 + (dx + 1)] += gkv;
            }
          }
        }
      }
    }
    return gx;
  }
};

struct Relu {
  std::vector<std::uint8_t> mask;

  std::vector<double> forward(const std::vector<double>& x) {
    mask.resize(x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      mask[i] = x[i] > 0.0;
      y[i] = mask[i] ? x[i] : 0.0;
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) const {
    std::vector<double> gx(gy.size());
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = mask[i] ? gy[i] : 0.0;
    return gx;
  }
};

// 2x2 max pooling, stride 2, trailing row/column dropped.
struct MaxPool2 {
  int B = 0, C = 0, H = 0, W = 0;
  std::vector<std::uint32_t> argmax;

  std::vector<double> forward(const std::vector<double>& x, int batch, int c, int h, int w) {
    B = batch; C = c; H = h; W = w;
    const int oh = h / 2, ow = w / 2;
    std::vector<double> y(static_cast<std::size_t>(B) * C * oh * ow);
    argmax.resize(y.size());
    std::size_t oi = 0;
    for (int b = 0; b < B; ++b) {
      for (int ch = 0; ch < C; ++ch) {
        const double* im = x.data() + (static_cast<std::size_t>(b) * C + ch) * H * W;
        for (int i = 0; i < oh; ++i) {
          for (int j = 0; j < ow; ++j, ++oi) {
            std::uint32_t best = static_cast<std::uint32_t>(2 * i * W + 2 * j);
            double bv = im[best];
            const std::uint32_t cand[3] = {best + 1,
                                           best + static_cast<std::uint32_t>(W),
                                           best + static_cast<std::uint32_t>(W) + 1};
            for (std::uint32_t idx : cand)
              if (im[idx] > bv) { bv = im[idx]; best = idx; }
            y[oi] = bv;
            argmax[oi] = best;
          }
        }
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) const {
    const int oh = H / 2, ow = W / 2;
    std::vector<double> gx(static_cast<std::size_t>(B) * C * H * W, 0.0);
    std::size_t oi = 0;
    for (int b = 0; b < B; ++b)
      for (int ch = 0; ch < C; ++ch) {
        double* gim = gx.data() + (static_cast<std::size_t>(b) * C + ch) * H * W;
        for (int i = 0; i < oh * ow; ++i, ++oi) gim[argmax[oi]] += gy[oi];
      }
    return gx;
  }
};

struct GlobalAvgPool {
  int B = 0, C = 0, HW = 0;

  std::vector<double> forward(const std::vector<double>& x, int batch, int c, int h, int w) {
    B = batch; C = c; HW = h * w;
    std::vector<double> y(static_cast<std::size_t>(B) * C, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double* p = x.data() + i * HW;
      double acc = 0.0;
      for (int j = 0; j < HW; ++j) acc += p[j];
      y[i] = acc / HW;
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) const {
    std::vector<double> gx(static_cast<std::size_t>(B) * C * HW);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      const double v = gy[i] / HW;
      double* p = gx.data() + i * HW;
      for (int j = 0; j < HW; ++j) p[j] = v;
    }
    return gx;
  }
};

struct Affine {
  int in_d = 0, out_d = 0;
  ParamBlock weight, bias;  // weight is out_d x in_d row-major
  std::vector<double> x_cache;
  int B = 0;

  void init(const std::string& name, int in_dim, int out_dim, Rng& rng) {
    in_d = in_dim;
    out_d = out_dim;
    weight.name = name + ".w";
    bias.name = name + ".b";
    weight.w.resize(static_cast<std::size_t>(out_d) * in_d);
    bias.w.assign(out_d, 0.0);
    const double scale = std::sqrt(2.0 / in_d);
    for (auto& v : weight.w) v = scale * rng.normal();
    weight.g.assign(weight.w.size(), 0.0);
    bias.g.assign(bias.w.size(), 0.0);
  }

  std::vector<double> forward(const std::vector<double>& x, int batch) {
    if (x.size() != static_cast<std::size_t>(batch) * in_d)
      throw UsageError("Affine " + weight.name + ": input size mismatch");
    B = batch;
    x_cache = x;
    std::vector<double> y(static_cast<std::size_t>(B) * out_d);
    for (int b = 0; b < B; ++b) {
      const double* xb = x.data() + static_cast<std::size_t>(b) * in_d;
      double* yb = y.data() + static_cast<std::size_t>(b) * out_d;
      for (int o = 0; o < out_d; ++o) {
        const double* wr = weight.w.data() + static_cast<std::size_t>(o) * in_d;
        double acc = bias.w[o];
        for (int i = 0; i < in_d; ++i) acc += wr[i] * xb[i];
        yb[o] = acc;
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) {
    std::vector<double> gx(static_cast<std::size_t>(B) * in_d, 0.0);
    for (int b = 0; b < B; ++b) {
      const double* xb = x_cache.data() + static_cast<std::size_t>(b) * in_d;
      const double* gb = gy.data() + static_cast<std::size_t>(b) * out_d;
      double* gxb = gx.data() + static_cast<std::size_t>(b) * in_d;
      for (int o = 0; o < out_d; ++o) {
        const double go = gb[o];
        bias.g[o] += go;
        double* gw = weight.g.data() + static_cast<std::size_t>(o) * in_d;
        const double* wr = weight.w.data() + static_cast<std::size_t>(o) * in_d;
        for (int i = 0; i < in_d; ++i) {
          gw[i] += go * xb[i];
          gxb[i] += go * wr[i];
        }
      }
    }
    return gx;
  }
};

// 1-D batch normalization over the batch dimension. Train mode normalizes by
// batch statistics (population variance) and updates running stats; eval mode
// uses the running stats and is therefore batch independent.
struct BatchNorm1d {
  int D = 0;
  double eps = 1e-5;
  double momentum = 0.1;
  ParamBlock gamma, beta, running_mean, running_var;
  std::vector<double> xhat_cache, inv_std_cache;
  int B = 0;

  void init(const std::string& name, int dim) {
    D = dim;
    gamma.name = name + ".gamma";
    beta.name = name + ".beta";
    running_mean.name = name + ".rmean";
    running_var.name = name + ".rvar";
    gamma.w.assign(D, 1.0);
    beta.w.assign(D, 0.0);
    running_mean.w.assign(D, 0.0);
    running_var.w.assign(D, 1.0);
    gamma.g.assign(D, 0.0);
    beta.g.assign(D, 0.0);
    running_mean.g.assign(D, 0.0);
    running_var.g.assign(D, 0.0);
  }

  std::vector<double> forward(const std::vector<double>& x, int batch, bool train) {
    if (x.size() != static_cast<std::size_t>(batch) * D)
      throw UsageError("BatchNorm1d " + gamma.name + ": input size mismatch");
    B = batch;
    std::vector<double> y(x.size());
    if (train) {
      if (B < 2) throw UsageError("BatchNorm1d: train mode needs batch >= 2");
      xhat_cache.resize(x.size());
      inv_std_cache.resize(D);
      for (int d = 0; d < D; ++d) {
        double mean = 0.0;
        for (int b = 0; b < B; ++b) mean += x[static_cast<std::size_t>(b) * D + d];
        mean /= B;
        double var = 0.0;
        for (int b = 0; b < B; ++b) {
          const double c = x[static_cast<std::size_t>(b) * D + d] - mean;
          var += c * c;
        }
        var /= B;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std_cache[d] = inv;
        for (int b = 0; b < B; ++b) {
          const std::size_t i = static_cast<std::size_t>(b) * D + d;
          xhat_cache[i] = (x[i] - mean) * inv;
          y[i] = gamma.w[d] * xhat_cache[i] + beta.w[d];
        }
        running_mean.w[d] = (1.0 - momentum) * running_mean.w[d] + momentum * mean;
        running_var.w[d] = (1.0 - momentum) * running_var.w[d] + momentum * var;
      }
    } else {
      for (int d = 0; d < D; ++d) {
        const double inv = 1.0 / std::sqrt(running_var.w[d] + eps);
        for (int b = 0; b < B; ++b) {
          const std::size_t i = static_cast<std::size_t>(b) * D + d;
          y[i] = gamma.w[d] * (x[i] - running_mean.w[d]) * inv + beta.w[d];
        }
      }
    }
    return y;
  }

  // Train-mode backward only (eval mode is not used in optimization).
  std::vector<double> backward(const std::vector<double>& gy) {
    std::vector<double> gx(gy.size());
    for (int d = 0; d < D; ++d) {
      double sum_g = 0.0, sum_gx = 0.0;
      for (int b = 0; b < B; ++b) {
        const std::size_t i = static_cast<std::size_t>(b) * D + d;
        const double gyh = gy[i] * gamma.w[d];
        sum_g += gyh;
        sum_gx += gyh * xhat_cache[i];
        gamma.g[d] += gy[i] * xhat_cache[i];
        beta.g[d] += gy[i];
      }
      const double inv = inv_std_cache[d];
      for (int b = 0; b < B; ++b) {
        const std::size_t i = static_cast<std::size_t>(b) * D + d;
        const double gyh = gy[i] * gamma.w[d];
        gx[i] = inv * (gyh - sum_g / B - xhat_cache[i] * sum_gx / B);
      }
    }
    return gx;
  }
};

// ---------------------------------------------------------------------------
// Encoder: VGG-style conv stack. Pool after every conv stage except the last,
// which feeds a global average pool, then an affine to the embedding.
// ---------------------------------------------------------------------------

struct Encoder {
  ArchitectureDescriptor desc;
  std::vector<Conv3x3> convs;
  std::vector<Relu> relus;
  std::vector<MaxPool2> pools;
  GlobalAvgPool gap;
  Affine fc;

  void init(const ArchitectureDescriptor& d, Rng& rng) {
    desc = d;
    const std::size_t n = d.conv_channels.size();
    if (n < 1) throw ConfigError("ArchitectureDescriptor: need >= 1 conv stage");
    convs.resize(n);
    relus.resize(n);
    pools.resize(n - 1);
    int in_c = d.in_channels;
    for (std::size_t s = 0; s < n; ++s) {
      convs[s].init("enc.conv" + std::to_string(s), in_c, d.conv_channels[s], rng);
      in_c = d.conv_channels[s];
    }
    fc.init("enc.fc", d.conv_channels.back(), d.embedding_dim, rng);
  }

  // Input: B x in_channels x in_f x in_t. Output: B x embedding_dim.
  std::vector<double> forward(const std::vector<double>& x, int B) {
    int h = desc.in_f, w = desc.in_t;
    std::vector<double> cur = x;
    for (std::size_t s = 0; s < convs.size(); ++s) {
      cur = convs[s].forward(cur, B, h, w);
      cur = relus[s].forward(cur);
      if (s + 1 < convs.size()) {
        cur = pools[s].forward(cur, B, desc.conv_channels[s], h, w);
        h /= 2;
        w /= 2;
        if (h < 1 || w < 1)
          throw UsageError("Encoder: input too small at stage " + std::to_string(s));
      }
    }
    cur = gap.forward(cur, B, desc.conv_channels.back(), h, w);
    cur = fc.forward(cur, B);
    check_finite(cur, "encoder output");
    return cur;
  }

  std::vector<double> backward(const std::vector<double>& g_emb) {
    std::vector<double> g = fc.backward(g_emb);
    g = gap.backward(g);
    for (std::size_t s = convs.size(); s-- > 0;) {
      if (s + 1 < convs.size()) g = pools[s].backward(g);
      g = relus[s].backward(g);
      g = convs[s].backward(g);
    }
    return g;
  }

  void visit_params(const ParamVisitor& fn) {
    for (auto& c : convs) {
      fn(c.weight);
      fn(c.bias);
    }
    fn(fc.weight);
    fn(fc.bias);
  }
};

// Projector: affine to the projection dimension followed by batch norm.
struct Projector {
  Affine fc;
  BatchNorm1d bn;

  void init(const ArchitectureDescriptor& d, Rng& rng) {
    fc.init("proj.fc", d.embedding_dim, d.projection_dim, rng);
    bn.init("proj.bn", d.projection_dim);
  }

  std::vector<double> forward(const std::vector<double>& emb, int B, bool train) {
    auto y = bn.forward(fc.forward(emb, B), B, train);
    check_finite(y, "projector output");
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy) {
    return fc.backward(bn.backward(gy));
  }

  void visit_params(const ParamVisitor& fn) {
    fn(fc.weight);
    fn(fc.bias);
    fn(bn.gamma);
    fn(bn.beta);
    fn(bn.running_mean);
    fn(bn.running_var);
  }

  // Optimizer targets only; running stats are excluded.
  void visit_trainable(const ParamVisitor& fn) {
    fn(fc.weight);
    fn(fc.bias);
    fn(bn.gamma);
    fn(bn.beta);
  }
};

// Classifier head: affine -> ReLU -> affine. ~4k parameters at d=28, K=2.
struct ClassifierHead {
  Affine fc1, fc2;
  Relu relu;

  void init(int in_dim, int hidden, int n_classes, Rng& rng) {
    fc1.init("head.fc1", in_dim, hidden, rng);
    fc2.init("head.fc2", hidden, n_classes, rng);
  }

  int n_params() const {
    return static_cast<int>(fc1.weight.w.size() + fc1.bias.w.size() +
                            fc2.weight.w.size() + fc2.bias.w.size());
  }

  std::vector<double> forward(const std::vector<double>& x, int B) {
    auto y = fc2.forward(relu.forward(fc1.forward(x, B)), B);
    check_finite(y, "classifier logits");
    return y;
  }

  std::vector<double> backward(const std::vector<double>& g_logits) {
    return fc1.backward(relu.backward(fc2.backward(g_logits)));
  }

  void visit_params(const ParamVisitor& fn) {
    fn(fc1.weight);
    fn(fc1.bias);
    fn(fc2.weight);
    fn(fc2.bias);
  }
};

// Row-wise softmax. Each output row sums to 1.
inline std::vector<double> softmax(const std::vector<double>& logits, int B, int K) {
  std::vector<double> p(logits.size());
  for (int b = 0; b < B; ++b) {
    const double* lb = logits.data() + static_cast<std::size_t>(b) * K;
    double* pb = p.data() + static_cast<std::size_t>(b) * K;
    double mx = lb[0];
    for (int k = 1; k < K; ++k) mx = std::max(mx, lb[k]);
    double z = 0.0;
    for (int k = 0; k < K; ++k) {
      pb[k] = std::exp(lb[k] - mx);
      z += pb[k];
    }
    for (int k = 0; k < K; ++k) pb[k] /= z;
  }
  return p;
}

// Mean cross-entropy over the batch; grad is w.r.t. the logits.
inline double softmax_xent(const std::vector<double>& logits,
                           const std::vector<int>& labels, int B, int K,
                           std::vector<double>* grad) {
  const auto p = softmax(logits, B, K);
  double loss = 0.0;
  if (grad) grad->assign(logits.size(), 0.0);
  for (int b = 0; b < B; ++b) {
    const double pt = p[static_cast<std::size_t>(b) * K + labels[b]];
    loss -= std::log(std::max(pt, 1e-300));
    if (grad) {
      for (int k = 0; k < K; ++k)
        (*grad)[static_cast<std::size_t>(b) * K + k] =
            (p[static_cast<std::size_t>(b) * K + k] - (k == labels[b] ? 1.0 : 0.0)) / B;
    }
  }
  return loss / B;
}

// ---------------------------------------------------------------------------
// Adam over a fixed list of parameter blocks. Running batch-norm statistics
// are not optimizer targets and must not be registered here.
// ---------------------------------------------------------------------------

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<ParamBlock*> blocks;
  std::vector<std::vector<double>> m, v;
  long t = 0;

  void attach(ParamBlock& b) {
    blocks.push_back(&b);
    m.emplace_back(b.w.size(), 0.0);
    v.emplace_back(b.w.size(), 0.0);
  }

  void zero_grad() {
    for (auto* b : blocks) std::fill(b->g.begin(), b->g.end(), 0.0);
  }

  void step() {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& b = *blocks[i];
      for (std::size_t j = 0; j < b.w.size(); ++j) {
        m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * b.g[j];
        v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * b.g[j] * b.g[j];
        b.w[j] -= lr * (m[i][j] / bc1) / (std::sqrt(v[i][j] / bc2) + eps);
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Finite-difference gradient verification.
//
// run_backward must zero gradients, run the forward pass, and backpropagate
// into the blocks' g buffers; compute_loss must evaluate the same loss
// without side effects on gradients. Returns the max relative error over up
// to n_coords randomly sampled parameter coordinates.
// ---------------------------------------------------------------------------

inline double grad_check(const std::vector<ParamBlock*>& blocks,
                         const std::function<double()>& compute_loss,
                         const std::function<void()>& run_backward,
                         int n_coords, Rng& rng, double eps = 1e-4) {
  run_backward();
  std::vector<std::vector<double>> saved_g;
  std::size_t total = 0;
  for (auto* b : blocks) {
    saved_g.push_back(b->g);
    total += b->w.size();
  }
  if (total == 0) throw UsageError("grad_check: no parameters");
  double max_rel = 0.0;
  for (int c = 0; c < n_coords; ++c) {
    std::size_t idx = rng.uniform_int(total);
    std::size_t bi = 0;
    while (idx >= blocks[bi]->w.size()) {
      idx -= blocks[bi]->w.size();
      ++bi;
    }
    double& w = blocks[bi]->w[idx];
    const double orig = w;
    w = orig + eps;
    const double fp = compute_loss();
    w = orig - eps;
    const double fm = compute_loss();
    w = orig;
    const double fd = (fp - fm) / (2.0 * eps);
    const double g = saved_g[bi][idx];
    const double denom = std::max({std::abs(fd), std::abs(g), 1e-6});
    max_rel = std::max(max_rel, std::abs(fd - g) / denom);
  }
  return max_rel;
}

}  // namespace seisbt
