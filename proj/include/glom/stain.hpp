#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <glom/core.hpp>
#include <glom/image.hpp>
#include <glom/rng.hpp>

namespace glom {

// Optical density image: od = -log10((I + 1) / 255) per channel, >= 0.
struct ODImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // height * width * 3

  ODImage() = default;
  ODImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h * 3, 0.f) {}

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * 3 + c;
  }
  float& at(int x, int y, int c) { return values[index(x, y, c)]; }
  float at(int x, int y, int c) const { return values[index(x, y, c)]; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

inline ODImage rgb_to_od(const RGBImage& img) {
  ODImage od(img.width, img.height);
  // 256 precomputed entries; intensity 255 clamps to OD 0.
  std::array<float, 256> lut;
  for (int i = 0; i < 256; ++i)
    lut[i] = static_cast<float>(std::max(0.0, -std::log10((i + 1.0) / 255.0)));
  for (std::size_t i = 0; i < img.pixels.size(); ++i) od.values[i] = lut[img.pixels[i]];
  return od;
}

inline RGBImage od_to_rgb(const ODImage& od) {
  RGBImage img(od.width, od.height);
  for (std::size_t i = 0; i < od.values.size(); ++i) {
    const double intensity = 255.0 * std::pow(10.0, -static_cast<double>(od.values[i])) - 1.0;
    img.pixels[i] = clamp_u8(std::round(intensity));
  }
  return img;
}

// Pixel is tissue iff its mean OD over channels exceeds the threshold.
inline std::vector<std::uint8_t> tissue_mask(const ODImage& od, double od_threshold = 0.15) {
  std::vector<std::uint8_t> mask(od.pixel_count(), 0);
  std::size_t count = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    const double mean =
        (od.values[3 * p] + od.values[3 * p + 1] + od.values[3 * p + 2]) / 3.0;
    if (mean > od_threshold) {
      mask[p] = 1;
      ++count;
    }
  }
  if (count == 0) throw NoTissueError();
  return mask;
}

// 3x2 matrix of unit-norm OD color vectors, one column per stain. Column 0
// carries the larger red-channel component (canonical order).
struct StainMatrix {
  std::array<std::array<double, 2>, 3> m{};  // [channel][stain]

  double& operator()(int channel, int stain) { return m[channel][stain]; }
  double operator()(int channel, int stain) const { return m[channel][stain]; }

  std::array<double, 3> column(int j) const { return {m[0][j], m[1][j], m[2][j]}; }

  void set_column(int j, const std::array<double, 3>& v) {
    for (int c = 0; c < 3; ++c) m[c][j] = v[c];
  }

  double column_norm(int j) const {
    return std::sqrt(m[0][j] * m[0][j] + m[1][j] * m[1][j] + m[2][j] * m[2][j]);
  }

  void validate() const {
    for (int j = 0; j < 2; ++j) {
      for (int c = 0; c < 3; ++c)
        if (!(m[c][j] >= 0.0)) throw InvalidArgument("StainMatrix: negative entry");
      if (std::abs(column_norm(j) - 1.0) > 1e-6)
        throw InvalidArgument("StainMatrix: column not unit norm");
    }
    if (m[0][0] < m[0][1]) throw InvalidArgument("StainMatrix: columns not in canonical order");
  }

  // PAS-like defaults: a blue-purple nuclear stain and the magenta PAS stain.
  static StainMatrix canonical() {
    StainMatrix w;
    w.set_column(0, normalized({0.65, 0.70, 0.29}));
    w.set_column(1, normalized({0.15, 0.80, 0.58}));
    return w;
  }

  static std::array<double, 3> normalized(std::array<double, 3> v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& x : v) x /= n;
    return v;
  }
};

// Target statistics used for normalization: the stain basis plus the 99th
// percentile concentration per stain over tissue pixels.
struct StainStats {
  StainMatrix matrix;
  std::array<double, 2> conc_percentile_99{1.0, 1.0};
};

struct StainParams {
  double od_threshold = 0.15;
  double sparsity_weight = 0.1;
  int iterations = 200;
  int max_pixels = 100000;
  std::uint64_t seed = 7;
};

struct StainEstimate {
  StainMatrix matrix;
  bool converged = false;
  int iterations_run = 0;
};

namespace detail {

// min ||od - W h||^2 + l1 * (h0 + h1) subject to h >= 0, for one pixel.
// G = W^T W, c = W^T od - l1/2; candidates are the interior solution, the two
// axes and the origin.
inline std::array<double, 2> nnls2(const std::array<std::array<double, 2>, 2>& G,
                                   const std::array<double, 2>& c) {
  const double det = G[0][0] * G[1][1] - G[0][1] * G[1][0];
  double best_obj = 0.0;  // objective at the origin (relative form)
  std::array<double, 2> best{0.0, 0.0};
  auto consider = [&](double h0, double h1) {
    if (h0 < 0.0 || h1 < 0.0) return;
    // f(h) = h^T G h - 2 c^T h, up to a constant.
    const double obj = h0 * (G[0][0] * h0 + G[0][1] * h1) + h1 * (G[1][0] * h0 + G[1][1] * h1) -
                       2.0 * (c[0] * h0 + c[1] * h1);
    if (obj < best_obj) {
      best_obj = obj;
      best = {h0, h1};
    }
  };
  if (std::abs(det) > 1e-12) {
    consider((c[0] * G[1][1] - c[1] * G[0][1]) / det, (c[1] * G[0][0] - c[0] * G[1][0]) / det);
  }
  if (G[0][0] > 1e-12) consider(std::max(0.0, c[0] / G[0][0]), 0.0);
  if (G[1][1] > 1e-12) consider(0.0, std::max(0.0, c[1] / G[1][1]));
  return best;
}

inline std::array<double, 2> solve_pixel(const StainMatrix& w, const std::array<double, 3>& od,
                                         double l1) {
  std::array<std::array<double, 2>, 2> G{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      G[i][j] = w(0, i) * w(0, j) + w(1, i) * w(1, j) + w(2, i) * w(2, j);
  std::array<double, 2> c{};
  for (int j = 0; j < 2; ++j)
    c[j] = w(0, j) * od[0] + w(1, j) * od[1] + w(2, j) * od[2] - 0.5 * l1;
  return nnls2(G, c);
}

inline void canonical_order(StainMatrix& w, std::array<double, 2>* per_stain = nullptr) {
  if (w(0, 0) < w(0, 1)) {
    for (int c = 0; c < 3; ++c) std::swap(w.m[c][0], w.m[c][1]);
    if (per_stain) std::swap((*per_stain)[0], (*per_stain)[1]);
  }
}

}  // namespace detail

// Sparse non-negative factorization OD ~= W * H by alternating closed-form
// non-negative least squares with an L1 penalty on the concentrations.
// Deterministic under the seed (used for initial noise and subsampling).
inline StainEstimate estimate_stain_matrix(const std::vector<std::array<double, 3>>& od_pixels,
                                           const StainParams& params = {}) {
  if (od_pixels.size() < 100)
    throw InvalidArgument("estimate_stain_matrix: need at least 100 tissue pixels");

  Rng rng(derive_seed(params.seed, 0x57a17));
  std::vector<std::array<double, 3>> pixels;
  if (od_pixels.size() > static_cast<std::size_t>(params.max_pixels)) {
    pixels.reserve(params.max_pixels);
    // Seeded uniform sample without replacement (partial Fisher-Yates).
    std::vector<std::uint32_t> idx(od_pixels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (int k = 0; k < params.max_pixels; ++k) {
      const std::size_t j = k + rng.uniform_int(idx.size() - k);
      std::swap(idx[k], idx[j]);
      pixels.push_back(od_pixels[idx[k]]);
    }
  } else {
    pixels = od_pixels;
  }

  const StainMatrix canonical = StainMatrix::canonical();
  StainMatrix w;
  for (int j = 0; j < 2; ++j) {
    std::array<double, 3> col = canonical.column(j);
    for (int c = 0; c < 3; ++c) col[c] = std::max(0.0, col[c] + 0.05 * rng.normal());
    w.set_column(j, StainMatrix::normalized(col));
  }

  const std::size_t n = pixels.size();
  std::vector<std::array<double, 2>> h(n);
  StainEstimate result;
  for (int iter = 0; iter < params.iterations; ++iter) {
    // H step: per-pixel sparse NNLS against the current basis.
    for (std::size_t p = 0; p < n; ++p)
      h[p] = detail::solve_pixel(w, pixels[p], params.sparsity_weight);

    // W step: per-channel NNLS (no penalty); G = H H^T.
    std::array<std::array<double, 2>, 2> G{};
    std::array<std::array<double, 2>, 3> rhs{};
    for (std::size_t p = 0; p < n; ++p) {
      G[0][0] += h[p][0] * h[p][0];
      G[0][1] += h[p][0] * h[p][1];
      G[1][1] += h[p][1] * h[p][1];
      for (int c = 0; c < 3; ++c) {
        rhs[c][0] += h[p][0] * pixels[p][c];
        rhs[c][1] += h[p][1] * pixels[p][c];
      }
    }
    G[1][0] = G[0][1];

    StainMatrix next = w;
    for (int c = 0; c < 3; ++c) {
      const auto row = detail::nnls2(G, {rhs[c][0], rhs[c][1]});
      next(c, 0) = row[0];
      next(c, 1) = row[1];
    }
    // Re-normalize columns; a collapsed column restarts from the canonical
    // direction with fresh noise.
    for (int j = 0; j < 2; ++j) {
      const double norm = next.column_norm(j);
      if (norm < 1e-8) {
        std::array<double, 3> col = canonical.column(j);
        for (int c = 0; c < 3; ++c) col[c] = std::max(0.0, col[c] + 0.05 * rng.normal());
        next.set_column(j, StainMatrix::normalized(col));
      } else {
        for (int c = 0; c < 3; ++c) next(c, j) /= norm;
      }
    }

    double delta = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j < 2; ++j) delta = std::max(delta, std::abs(next(c, j) - w(c, j)));
    w = next;
    result.iterations_run = iter + 1;
    if (delta < 1e-9) {
      result.converged = true;
      break;
    }
  }

  detail::canonical_order(w);
  result.matrix = w;
  return result;
}

// Per-pixel non-negative least squares concentrations (no sparsity penalty).
inline std::vector<std::array<double, 2>> compute_concentrations(const ODImage& od,
                                                                 const StainMatrix& w) {
  std::vector<std::array<double, 2>> h(od.pixel_count());
  for (std::size_t p = 0; p < h.size(); ++p) {
    const std::array<double, 3> pix{od.values[3 * p], od.values[3 * p + 1],
                                    od.values[3 * p + 2]};
    h[p] = detail::solve_pixel(w, pix, 0.0);
  }
  return h;
}

namespace detail {

// Linear-interpolation percentile (q in [0,1]) of an unsorted sample.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

}  // namespace detail

// Stain statistics of an image: estimated basis + 99th percentile
// concentration per stain over tissue pixels.
inline StainStats compute_stain_stats(const RGBImage& img, const StainParams& params = {}) {
  const ODImage od = rgb_to_od(img);
  const auto mask = tissue_mask(od, params.od_threshold);
  std::vector<std::array<double, 3>> tissue;
  for (std::size_t p = 0; p < mask.size(); ++p)
    if (mask[p])
      tissue.push_back({od.values[3 * p], od.values[3 * p + 1], od.values[3 * p + 2]});
  const auto estimate = estimate_stain_matrix(tissue, params);

  const auto conc = compute_concentrations(od, estimate.matrix);
  std::array<std::vector<double>, 2> tissue_conc;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) continue;
    tissue_conc[0].push_back(conc[p][0]);
    tissue_conc[1].push_back(conc[p][1]);
  }
  StainStats stats;
  stats.matrix = estimate.matrix;
  stats.conc_percentile_99 = {detail::percentile(std::move(tissue_conc[0]), 0.99),
                              detail::percentile(std::move(tissue_conc[1]), 0.99)};
  return stats;
}

// Remaps the source image onto the target's stain basis, matching the 99th
// percentile concentration per stain. Background reconstructs to near white.
inline RGBImage normalize_stains(const RGBImage& source, const StainStats& target,
                                 const StainParams& params = {}) {
  const ODImage od = rgb_to_od(source);
  const auto mask = tissue_mask(od, params.od_threshold);  // throws when blank

  std::vector<std::array<double, 3>> tissue;
  for (std::size_t p = 0; p < mask.size(); ++p)
    if (mask[p])
      tissue.push_back({od.values[3 * p], od.values[3 * p + 1], od.values[3 * p + 2]});
  const auto estimate = estimate_stain_matrix(tissue, params);

  const auto conc = compute_concentrations(od, estimate.matrix);
  std::array<std::vector<double>, 2> tissue_conc;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) continue;
    tissue_conc[0].push_back(conc[p][0]);
    tissue_conc[1].push_back(conc[p][1]);
  }
  std::array<double, 2> scale{1.0, 1.0};
  for (int j = 0; j < 2; ++j) {
    const double src_p99 = detail::percentile(std::move(tissue_conc[j]), 0.99);
    // A stain absent from the source stays untouched.
    if (src_p99 > 1e-8) scale[j] = target.conc_percentile_99[j] / src_p99;
  }

  ODImage out(source.width, source.height);
  for (std::size_t p = 0; p < conc.size(); ++p) {
    const double h0 = conc[p][0] * scale[0];
    const double h1 = conc[p][1] * scale[1];
    for (int c = 0; c < 3; ++c)
      out.values[3 * p + c] =
          static_cast<float>(std::max(0.0, target.matrix(c, 0) * h0 + target.matrix(c, 1) * h1));
  }
  return od_to_rgb(out);
}

}  // namespace glom
