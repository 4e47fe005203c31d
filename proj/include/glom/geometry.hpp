#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <glom/core.hpp>

namespace glom {

// Axis-aligned box in pixel coordinates, continuous convention:
// area = (x_max - x_min) * (y_max - y_min).
struct BoundingBox {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  BoundingBox() = default;
  BoundingBox(double x0, double y0, double x1, double y1)
      : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {}

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
  }

  bool operator==(const BoundingBox& o) const {
    return x_min == o.x_min && y_min == o.y_min && x_max == o.x_max && y_max == o.y_max;
  }
};

struct Detection {
  BoundingBox box;
  double score = 0.0;  // confidence in [0, 1]
};

inline void require_valid(const BoundingBox& b, const char* who) {
  if (!b.valid()) throw InvalidArgument(std::string(who) + ": degenerate or non-finite box");
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a, "iou");
  require_valid(b, "iou");
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

// Indices sorted by descending score; ties keep the original order.
inline std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

// Greedy non-maximum suppression. Kept boxes have pairwise IoU <= threshold
// against every higher-scored kept box; output is sorted by descending score.
inline std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold) {
  if (iou_threshold < 0.0 || iou_threshold > 1.0)
    throw InvalidArgument("nms: threshold outside [0,1]");
  const auto order = score_order(dets);
  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (iou(dets[idx].box, k.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(dets[idx]);
  }
  return kept;
}

// One-to-one greedy matching of predictions to ground truth.
struct MatchResult {
  // (prediction index, truth index) pairs, in match order.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_preds;   // false positives
  std::vector<std::size_t> unmatched_truths;  // false negatives

  std::size_t tp() const { return matches.size(); }
};

// Predictions are visited in descending score order (stable); each takes the
// unmatched truth with the highest IoU >= threshold. Equal IoU breaks to the
// lower truth index.
inline MatchResult match_detections(const std::vector<Detection>& preds,
                                    const std::vector<BoundingBox>& truths,
                                    double iou_threshold) {
  MatchResult result;
  std::vector<bool> truth_taken(truths.size(), false);
  std::vector<int> pred_match(preds.size(), -1);
  const auto order = score_order(preds);
  for (std::size_t pi : order) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t ti = 0; ti < truths.size(); ++ti) {
      if (truth_taken[ti]) continue;
      const double v = iou(preds[pi].box, truths[ti]);
      if (v >= iou_threshold && v > best_iou) {
        best = static_cast<int>(ti);
        best_iou = v;
      }
    }
    if (best >= 0) {
      truth_taken[best] = true;
      pred_match[pi] = best;
      result.matches.emplace_back(pi, static_cast<std::size_t>(best));
    }
  }
  for (std::size_t pi = 0; pi < preds.size(); ++pi)
    if (pred_match[pi] < 0) result.unmatched_preds.push_back(pi);
  for (std::size_t ti = 0; ti < truths.size(); ++ti)
    if (!truth_taken[ti]) result.unmatched_truths.push_back(ti);
  return result;
}

inline BoundingBox clip_box(const BoundingBox& b, double width, double height) {
  BoundingBox out;
  out.x_min = std::clamp(b.x_min, 0.0, width);
  out.y_min = std::clamp(b.y_min, 0.0, height);
  out.x_max = std::clamp(b.x_max, 0.0, width);
  out.y_max = std::clamp(b.y_max, 0.0, height);
  return out;
}

}  // namespace glom
