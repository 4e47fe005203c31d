#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <glom/image.hpp>
#include <glom/labels.hpp>
#include <glom/rng.hpp>

namespace glom {

// Square glomerulus crop with a 9-dim label vector. Entries are binary for
// annotated crops and fractional for CircleMix outputs.
struct LabeledCrop {
  RGBImage image;
  LabelVector labels{};

  void validate() const {
    if (image.width != image.height) throw InvalidArgument("LabeledCrop: image not square");
    bool any = false;
    for (double v : labels) {
      if (v < 0.0 || v > 1.0) throw InvalidArgument("LabeledCrop: label outside [0,1]");
      if (v > 0.0) any = true;
    }
    if (!any) throw InvalidArgument("LabeledCrop: no positive label");
  }
};

// Angular sector mix descriptor. lambda is the exact fraction of pixels taken
// from image A.
struct MixSpec {
  double start_angle = 0.0;  // degrees
  double end_angle = 0.0;    // degrees
  double lambda = 1.0;
};

namespace detail {

// Angle of the pixel center about the image center, degrees in [0, 360).
// Image coordinates: x right, y down, 0 degrees along +x.
inline double pixel_angle(int x, int y, int side) {
  const double dx = x + 0.5 - side * 0.5;
  const double dy = y + 0.5 - side * 0.5;
  double deg = std::atan2(dy, dx) * (180.0 / 3.14159265358979323846);
  if (deg < 0.0) deg += 360.0;
  return deg;
}

// Arc span in degrees; a zero span means the full circle.
inline double arc_span(double start, double end) {
  double span = std::fmod(end - start, 360.0);
  if (span < 0.0) span += 360.0;
  return span == 0.0 ? 360.0 : span;
}

}  // namespace detail

// Splices the angular sector [start_angle, end_angle) of crop A over crop B.
// Every output pixel is copied verbatim from exactly one parent; the exact
// center pixel (odd sides) belongs to A. Output labels are
// lambda * labels_a + (1 - lambda) * labels_b with lambda the exact pixel
// fraction taken from A.
inline std::pair<LabeledCrop, MixSpec> circlemix(const LabeledCrop& a, const LabeledCrop& b,
                                                 double start_angle, double end_angle) {
  if (a.image.width != b.image.width || a.image.height != b.image.height)
    throw InvalidArgument("circlemix: crop dimensions differ");
  const int side = a.image.width;
  const double span = detail::arc_span(start_angle, end_angle);

  LabeledCrop out;
  out.image = RGBImage(side, side);
  std::int64_t from_a = 0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double dx = x + 0.5 - side * 0.5;
      const double dy = y + 0.5 - side * 0.5;
      bool take_a;
      if (dx == 0.0 && dy == 0.0) {
        take_a = true;
      } else {
        double delta = std::fmod(detail::pixel_angle(x, y, side) - start_angle, 360.0);
        if (delta < 0.0) delta += 360.0;
        take_a = delta < span;
      }
      const RGBImage& src = take_a ? a.image : b.image;
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = src.at(x, y, c);
      from_a += take_a ? 1 : 0;
    }
  }

  MixSpec spec;
  spec.start_angle = start_angle;
  spec.end_angle = end_angle;
  spec.lambda = static_cast<double>(from_a) / (static_cast<double>(side) * side);
  for (int i = 0; i < kGlomerulusClassCount; ++i)
    out.labels[i] = spec.lambda * a.labels[i] + (1.0 - spec.lambda) * b.labels[i];
  return {std::move(out), spec};
}

struct MixedCrop {
  LabeledCrop crop;
  MixSpec spec;
  std::size_t parent_a = 0;
  std::size_t parent_b = 0;
};

// Seeded uniform pair and angle sampling; deterministic under the seed.
inline std::vector<MixedCrop> sample_mix_pairs(const std::vector<LabeledCrop>& dataset,
                                               std::size_t count, std::uint64_t seed) {
  if (dataset.empty()) throw InvalidArgument("sample_mix_pairs: empty dataset");
  Rng rng(derive_seed(seed, 0xc19c1e));
  std::vector<MixedCrop> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    MixedCrop mixed;
    mixed.parent_a = rng.uniform_int(dataset.size());
    mixed.parent_b = rng.uniform_int(dataset.size());
    const double start = rng.uniform(0.0, 360.0);
    const double end = rng.uniform(0.0, 360.0);
    auto [crop, spec] = circlemix(dataset[mixed.parent_a], dataset[mixed.parent_b], start, end);
    mixed.crop = std::move(crop);
    mixed.spec = spec;
    out.push_back(std::move(mixed));
  }
  return out;
}

namespace detail {

// Raw inverse-frequency rule: weight = max over the sample's positive classes
// of 1 / class count. Monotone under sample removal, unlike the normalized
// weights.
inline std::vector<double> raw_oversample_weights(const std::vector<LabelSet>& label_sets) {
  std::array<int, kGlomerulusClassCount> freq{};
  for (const auto& s : label_sets) {
    if (s.empty()) throw InvalidArgument("oversample_weights: sample without positive label");
    for (int c = 0; c < kGlomerulusClassCount; ++c)
      if (s.contains(static_cast<GlomerulusClass>(c))) ++freq[c];
  }
  std::vector<double> weights;
  weights.reserve(label_sets.size());
  for (const auto& s : label_sets) {
    double w = 0.0;
    for (int c = 0; c < kGlomerulusClassCount; ++c)
      if (s.contains(static_cast<GlomerulusClass>(c)) && freq[c] > 0)
        w = std::max(w, 1.0 / static_cast<double>(freq[c]));
    weights.push_back(w);
  }
  return weights;
}

}  // namespace detail

// Per-sample oversampling weights, normalized to sum 1.
inline std::vector<double> oversample_weights(const std::vector<LabelSet>& label_sets) {
  auto weights = detail::raw_oversample_weights(label_sets);
  double total = 0.0;
  for (double w : weights) total += w;
  if (total > 0.0)
    for (double& w : weights) w /= total;
  return weights;
}

}  // namespace glom
