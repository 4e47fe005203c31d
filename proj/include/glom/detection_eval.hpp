#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include <glom/geometry.hpp>

namespace glom {

// Predictions and ground truth for one image.
struct ImageDetections {
  std::vector<Detection> preds;
  std::vector<BoundingBox> truths;
};

struct DetectionEvalResult {
  std::map<double, double> ap_per_iou;  // IoU threshold -> AP
  std::map<double, double> ar_per_iou;  // IoU threshold -> AR
  double ap_range = 0.0;                // mean AP over IoU 0.50:0.95
  double ar_range = 0.0;                // mean AR over IoU 0.50:0.95
};

inline const std::vector<double>& coco_iou_thresholds() {
  static const std::vector<double> ts = [] {
    std::vector<double> v;
    for (int k = 0; k < 10; ++k) v.push_back((50 + 5 * k) / 100.0);
    return v;
  }();
  return ts;
}

namespace detail {

// Global score ordering across images: descending score, ties by image then
// insertion index.
struct PredRef {
  double score;
  std::size_t image;
  std::size_t index;
};

inline std::vector<PredRef> global_score_order(const std::vector<ImageDetections>& data) {
  std::vector<PredRef> refs;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data[i].preds.size(); ++j)
      refs.push_back({data[i].preds[j].score, i, j});
  std::stable_sort(refs.begin(), refs.end(),
                   [](const PredRef& a, const PredRef& b) { return a.score > b.score; });
  return refs;
}

// 101-point interpolated AP from a score-ordered PR sequence. For each recall
// level the interpolated precision is the maximum precision among points with
// recall >= that level.
inline double interpolate_ap_101(const std::vector<double>& precisions,
                                 const std::vector<double>& recalls) {
  double sum = 0.0;
  for (int g = 0; g <= 100; ++g) {
    const double level = g / 100.0;
    // recalls is nondecreasing: the qualifying points form a suffix.
    std::size_t first = std::lower_bound(recalls.begin(), recalls.end(), level) - recalls.begin();
    double best = 0.0;
    for (std::size_t k = first; k < precisions.size(); ++k) best = std::max(best, precisions[k]);
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace detail

// COCO-style average precision at one IoU threshold over a set of images.
inline double average_precision(const std::vector<ImageDetections>& data, double iou_threshold) {
  std::size_t total_gt = 0;
  for (const auto& img : data) total_gt += img.truths.size();
  if (total_gt == 0)
    throw InvalidArgument("average_precision: undefined without ground-truth boxes");

  const auto refs = detail::global_score_order(data);
  std::vector<std::vector<bool>> taken(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) taken[i].assign(data[i].truths.size(), false);

  std::vector<double> precisions, recalls;
  precisions.reserve(refs.size());
  recalls.reserve(refs.size());
  std::size_t tp = 0, seen = 0;
  for (const auto& ref : refs) {
    const auto& img = data[ref.image];
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t ti = 0; ti < img.truths.size(); ++ti) {
      if (taken[ref.image][ti]) continue;
      const double v = iou(img.preds[ref.index].box, img.truths[ti]);
      if (v >= iou_threshold && v > best_iou) {
        best = static_cast<int>(ti);
        best_iou = v;
      }
    }
    ++seen;
    if (best >= 0) {
      taken[ref.image][best] = true;
      ++tp;
    }
    precisions.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    recalls.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
  }
  return detail::interpolate_ap_101(precisions, recalls);
}

// Mean per-image recall at a detection budget. Images without ground truth do
// not contribute.
inline double average_recall(const std::vector<ImageDetections>& data, double iou_threshold,
                             int max_detections = 100) {
  double sum = 0.0;
  std::size_t images = 0;
  for (const auto& img : data) {
    if (img.truths.empty()) continue;
    std::vector<Detection> kept;
    const auto order = score_order(img.preds);
    for (std::size_t k = 0; k < order.size() && k < static_cast<std::size_t>(max_detections); ++k)
      kept.push_back(img.preds[order[k]]);
    const auto match = match_detections(kept, img.truths, iou_threshold);
    sum += static_cast<double>(match.tp()) / static_cast<double>(img.truths.size());
    ++images;
  }
  if (images == 0) throw InvalidArgument("average_recall: undefined without ground-truth boxes");
  return sum / static_cast<double>(images);
}

// AP and AR at each IoU in {0.50, 0.55, ..., 0.95} plus their means.
inline DetectionEvalResult evaluate_detections(const std::vector<ImageDetections>& data,
                                               int max_detections = 100) {
  DetectionEvalResult result;
  double ap_sum = 0.0, ar_sum = 0.0;
  for (double t : coco_iou_thresholds()) {
    const double ap = average_precision(data, t);
    const double ar = average_recall(data, t, max_detections);
    result.ap_per_iou[t] = ap;
    result.ar_per_iou[t] = ar;
    ap_sum += ap;
    ar_sum += ar;
  }
  result.ap_range = ap_sum / 10.0;
  result.ar_range = ar_sum / 10.0;
  return result;
}

}  // namespace glom
