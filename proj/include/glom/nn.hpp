#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <glom/core.hpp>
#include <glom/rng.hpp>

namespace glom::nn {

// Dense tensor, channel-major ([C,H,W] for feature maps).
template <class S>
struct Ten {
  std::vector<int> shape;
  std::vector<S> data;

  Ten() = default;
  explicit Ten(std::vector<int> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    data.assign(n, S(0));
  }

  std::size_t numel() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), S(0)); }
  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
};

using Tensor = Ten<float>;

template <class S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <class S>
void he_init(Ten<S>& t, Rng& rng, int fan_in) {
  const double scale = std::sqrt(2.0 / fan_in);
  for (auto& v : t.data) v = static_cast<S>(rng.normal() * scale);
}

template <class S>
void uniform_init(Ten<S>& t, Rng& rng, int fan_in) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data) v = static_cast<S>(rng.uniform(-a, a));
}

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

template <class S>
void im2col(const Ten<S>& x, int k, int stride, int pad, Ten<S>& cols) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Ho = conv_out_dim(H, k, stride, pad);
  const int Wo = conv_out_dim(W, k, stride, pad);
  cols = Ten<S>({C * k * k, Ho * Wo});
  S* out = cols.ptr();
  for (int c = 0; c < C; ++c) {
    const S* plane = x.ptr() + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          S* row = out + (static_cast<std::size_t>((c * k + ky) * k + kx) * Ho + oy) * Wo;
          if (iy < 0 || iy >= H) {
            std::fill(row, row + Wo, S(0));
            continue;
          }
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            row[ox] = (ix >= 0 && ix < W) ? plane[iy * W + ix] : S(0);
          }
        }
      }
    }
  }
}

template <class S>
void col2im(const Ten<S>& cols, int C, int H, int W, int k, int stride, int pad, Ten<S>& dx) {
  const int Ho = conv_out_dim(H, k, stride, pad);
  const int Wo = conv_out_dim(W, k, stride, pad);
  dx = Ten<S>({C, H, W});
  const S* in = cols.ptr();
  for (int c = 0; c < C; ++c) {
    S* plane = dx.ptr() + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          const S* row = in + (static_cast<std::size_t>((c * k + ky) * k + kx) * Ho + oy) * Wo;
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < W) plane[iy * W + ix] += row[ox];
          }
        }
      }
    }
  }
}

// y[OC,Ho,Wo] = w[OC, C*k*k] * im2col(x) + b
template <class S>
Ten<S> conv2d(const Ten<S>& x, const Ten<S>& w, const Ten<S>& b, int k, int stride, int pad) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int OC = w.dim(0);
  const int Ho = conv_out_dim(H, k, stride, pad);
  const int Wo = conv_out_dim(W, k, stride, pad);
  Ten<S> cols;
  im2col(x, k, stride, pad, cols);
  Ten<S> y({OC, Ho, Wo});
  ConstMatMap<S> wm(w.ptr(), OC, C * k * k);
  ConstMatMap<S> cm(cols.ptr(), C * k * k, Ho * Wo);
  MatMap<S> ym(y.ptr(), OC, Ho * Wo);
  ym.noalias() = wm * cm;
  for (int oc = 0; oc < OC; ++oc) ym.row(oc).array() += b.data[oc];
  return y;
}

// Accumulates dw/db; returns dx. The column buffer is recomputed from x.
template <class S>
Ten<S> conv2d_backward(const Ten<S>& dy, const Ten<S>& x, const Ten<S>& w, int k, int stride,
                       int pad, Ten<S>& dw, Ten<S>& db) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int OC = w.dim(0);
  const int Ho = dy.dim(1), Wo = dy.dim(2);
  Ten<S> cols;
  im2col(x, k, stride, pad, cols);
  ConstMatMap<S> dym(dy.ptr(), OC, Ho * Wo);
  ConstMatMap<S> cm(cols.ptr(), C * k * k, Ho * Wo);
  MatMap<S> dwm(dw.ptr(), OC, C * k * k);
  dwm.noalias() += dym * cm.transpose();
  for (int oc = 0; oc < OC; ++oc) db.data[oc] += dym.row(oc).sum();

  Ten<S> dcols({C * k * k, Ho * Wo});
  MatMap<S> dcm(dcols.ptr(), C * k * k, Ho * Wo);
  ConstMatMap<S> wm(w.ptr(), OC, C * k * k);
  dcm.noalias() = wm.transpose() * dym;
  Ten<S> dx;
  col2im(dcols, C, H, W, k, stride, pad, dx);
  return dx;
}

template <class S>
Ten<S> relu(const Ten<S>& x) {
  Ten<S> y = x;
  for (auto& v : y.data)
    if (v < S(0)) v = S(0);
  return y;
}

template <class S>
Ten<S> relu_backward(const Ten<S>& dy, const Ten<S>& y) {
  Ten<S> dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    if (y.data[i] <= S(0)) dx.data[i] = S(0);
  return dx;
}

// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
template <class S>
Ten<S> maxpool2(const Ten<S>& x, std::vector<std::int32_t>& argmax) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Ho = H / 2, Wo = W / 2;
  Ten<S> y({C, Ho, Wo});
  argmax.assign(y.numel(), -1);
  for (int c = 0; c < C; ++c) {
    const S* plane = x.ptr() + static_cast<std::size_t>(c) * H * W;
    for (int oy = 0; oy < Ho; ++oy) {
      for (int ox = 0; ox < Wo; ++ox) {
        int best = (2 * oy) * W + 2 * ox;
        S best_v = plane[best];
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (2 * oy + dy) * W + 2 * ox + dx;
            if (plane[idx] > best_v) {
              best_v = plane[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * Ho + oy) * Wo + ox;
        y.data[o] = best_v;
        argmax[o] = best + c * H * W;
      }
    }
  }
  return y;
}

template <class S>
Ten<S> maxpool2_backward(const Ten<S>& dy, const std::vector<int>& x_shape,
                         const std::vector<std::int32_t>& argmax) {
  Ten<S> dx(x_shape);
  for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[argmax[i]] += dy.data[i];
  return dx;
}

// Y[N,out] = X[N,in] * W[out,in]^T + b
template <class S>
Ten<S> linear(const Ten<S>& x, const Ten<S>& w, const Ten<S>& b) {
  const int N = x.dim(0), in = x.dim(1), out = w.dim(0);
  Ten<S> y({N, out});
  ConstMatMap<S> xm(x.ptr(), N, in);
  ConstMatMap<S> wm(w.ptr(), out, in);
  MatMap<S> ym(y.ptr(), N, out);
  ym.noalias() = xm * wm.transpose();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < out; ++j) y.data[static_cast<std::size_t>(i) * out + j] += b.data[j];
  return y;
}

template <class S>
Ten<S> linear_backward(const Ten<S>& dy, const Ten<S>& x, const Ten<S>& w, Ten<S>& dw,
                       Ten<S>& db) {
  const int N = x.dim(0), in = x.dim(1), out = w.dim(0);
  ConstMatMap<S> dym(dy.ptr(), N, out);
  ConstMatMap<S> xm(x.ptr(), N, in);
  MatMap<S> dwm(dw.ptr(), out, in);
  dwm.noalias() += dym.transpose() * xm;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < out; ++j) db.data[j] += dy.data[static_cast<std::size_t>(i) * out + j];
  Ten<S> dx({N, in});
  MatMap<S> dxm(dx.ptr(), N, in);
  ConstMatMap<S> wm(w.ptr(), out, in);
  dxm.noalias() = dym * wm;
  return dx;
}

template <class S>
S sigmoid(S z) {
  return z >= S(0) ? S(1) / (S(1) + std::exp(-z)) : std::exp(z) / (S(1) + std::exp(z));
}

// Mean binary cross-entropy over independent logits against (possibly
// fractional) targets. Adds scale * dL/dz to dlogits.
template <class S>
double bce_with_logits(const S* logits, const double* targets, std::size_t n, S* dlogits,
                       double scale = 1.0) {
  if (n == 0) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = static_cast<double>(logits[i]);
    const double t = targets[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    if (dlogits) {
      const double p = 1.0 / (1.0 + std::exp(-z));
      dlogits[i] += static_cast<S>((p - t) * scale / static_cast<double>(n));
    }
  }
  return loss / static_cast<double>(n);
}

// Softmax cross-entropy for one sample. Adds scale * dL/dz to dlogits and
// writes the probabilities when requested.
template <class S>
double softmax_ce(const S* logits, std::size_t n, int target, S* dlogits, double* probs_out,
                  double scale = 1.0) {
  double peak = static_cast<double>(logits[0]);
  for (std::size_t i = 1; i < n; ++i) peak = std::max(peak, static_cast<double>(logits[i]));
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) denom += std::exp(static_cast<double>(logits[i]) - peak);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::exp(static_cast<double>(logits[i]) - peak) / denom;
    if (probs_out) probs_out[i] = p;
    if (static_cast<int>(i) == target) loss = -std::log(std::max(p, 1e-300));
    if (dlogits)
      dlogits[i] += static_cast<S>((p - (static_cast<int>(i) == target ? 1.0 : 0.0)) * scale);
  }
  return loss;
}

// Smooth-L1 (Huber with delta 1) summed over n entries. Adds scale * dL/dp.
template <class S>
double smooth_l1(const S* pred, const double* target, std::size_t n, S* dpred,
                 double scale = 1.0) {
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    const double a = std::abs(d);
    loss += a < 1.0 ? 0.5 * d * d : a - 0.5;
    if (dpred) dpred[i] += static_cast<S>((a < 1.0 ? d : (d > 0 ? 1.0 : -1.0)) * scale);
  }
  return loss;
}

// Max pooling of an image-space box into a fixed P x P grid over a feature
// map. Empty bins produce zeros with argmax -1.
template <class S>
Ten<S> roi_maxpool(const Ten<S>& feat, double x0, double y0, double x1, double y1,
                   double spatial_scale, int P, std::vector<std::int32_t>& argmax) {
  const int C = feat.dim(0), Hf = feat.dim(1), Wf = feat.dim(2);
  const double fx0 = x0 * spatial_scale, fx1 = x1 * spatial_scale;
  const double fy0 = y0 * spatial_scale, fy1 = y1 * spatial_scale;
  Ten<S> out({C, P, P});
  argmax.assign(out.numel(), -1);
  for (int by = 0; by < P; ++by) {
    int ys = static_cast<int>(std::floor(fy0 + (fy1 - fy0) * by / P));
    int ye = static_cast<int>(std::ceil(fy0 + (fy1 - fy0) * (by + 1) / P));
    ys = std::clamp(ys, 0, Hf);
    ye = std::clamp(std::max(ye, ys + 1), 0, Hf);
    for (int bx = 0; bx < P; ++bx) {
      int xs = static_cast<int>(std::floor(fx0 + (fx1 - fx0) * bx / P));
      int xe = static_cast<int>(std::ceil(fx0 + (fx1 - fx0) * (bx + 1) / P));
      xs = std::clamp(xs, 0, Wf);
      xe = std::clamp(std::max(xe, xs + 1), 0, Wf);
      for (int c = 0; c < C; ++c) {
        const S* plane = feat.ptr() + static_cast<std::size_t>(c) * Hf * Wf;
        S best_v = S(0);
        int best = -1;
        for (int y = ys; y < ye; ++y) {
          for (int x = xs; x < xe; ++x) {
            const int idx = y * Wf + x;
            if (best < 0 || plane[idx] > best_v) {
              best_v = plane[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * P + by) * P + bx;
        if (best >= 0) {
          out.data[o] = best_v;
          argmax[o] = best + c * Hf * Wf;
        }
      }
    }
  }
  return out;
}

template <class S>
void roi_maxpool_backward(const Ten<S>& dy, const std::vector<std::int32_t>& argmax,
                          Ten<S>& dfeat) {
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    if (argmax[i] >= 0) dfeat.data[argmax[i]] += dy.data[i];
}

// Named references to a model's parameter tensors, used by the optimizer,
// serialization and gradient checks.
template <class S>
struct ParamRef {
  std::string name;
  Ten<S>* tensor;
};

template <class S>
struct GradSet {
  std::vector<Ten<S>> grads;

  explicit GradSet(const std::vector<ParamRef<S>>& params) {
    grads.reserve(params.size());
    for (const auto& p : params) grads.emplace_back(p.tensor->shape);
  }
  void zero() {
    for (auto& g : grads) g.zero();
  }
  void add(const GradSet& other) {
    for (std::size_t i = 0; i < grads.size(); ++i)
      for (std::size_t j = 0; j < grads[i].data.size(); ++j)
        grads[i].data[j] += other.grads[i].data[j];
  }
};

// Fixed step-size stochastic gradient descent.
template <class S>
void sgd_step(const std::vector<ParamRef<S>>& params, const GradSet<S>& grads, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i].tensor;
    const auto& g = grads.grads[i];
    for (std::size_t j = 0; j < p.data.size(); ++j)
      p.data[j] -= static_cast<S>(lr) * g.data[j];
  }
}

// Global-norm gradient clipping; returns the pre-clip norm.
template <class S>
double clip_gradients(GradSet<S>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads.grads)
    for (S v : g.data) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& g : grads.grads)
      for (S& v : g.data) v = static_cast<S>(v * f);
  }
  return norm;
}

}  // namespace glom::nn
