#pragma once

// Test-only reference implementations. These recompute detection metrics by
// brute force (re-running the greedy matching from scratch for every
// score-ordered prefix) and must stay independent of the incremental
// implementations they check.

#include <algorithm>
#include <vector>

#include <glom/detection_eval.hpp>
#include <glom/geometry.hpp>
#include <glom/rng.hpp>

namespace oracle {

inline double box_iou(const glom::BoundingBox& a, const glom::BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
  const double area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
  return inter / (area_a + area_b - inter);
}

// Greedy one-to-one matching, written directly from the rule: visit
// predictions in the given order, each takes the unmatched truth with the
// highest IoU >= threshold (ties to the lower index). Returns the match count.
inline std::size_t greedy_match_count(const std::vector<glom::Detection>& preds,
                                      const std::vector<std::size_t>& visit_order,
                                      const std::vector<glom::BoundingBox>& truths,
                                      double threshold) {
  std::vector<bool> used(truths.size(), false);
  std::size_t matched = 0;
  for (std::size_t pi : visit_order) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t ti = 0; ti < truths.size(); ++ti) {
      if (used[ti]) continue;
      const double v = box_iou(preds[pi].box, truths[ti]);
      if (v >= threshold && v > best_iou) {
        best = static_cast<int>(ti);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++matched;
    }
  }
  return matched;
}

struct GlobalRef {
  double score;
  std::size_t image;
  std::size_t index;
};

inline std::vector<GlobalRef> score_sorted_refs(const std::vector<glom::ImageDetections>& data) {
  std::vector<GlobalRef> refs;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data[i].preds.size(); ++j)
      refs.push_back({data[i].preds[j].score, i, j});
  std::stable_sort(refs.begin(), refs.end(),
                   [](const GlobalRef& a, const GlobalRef& b) { return a.score > b.score; });
  return refs;
}

// Brute-force 101-point AP: every score-ordered prefix is matched from
// scratch, then each recall level takes the maximum precision among points
// whose recall reaches it.
inline double average_precision(const std::vector<glom::ImageDetections>& data,
                                double threshold) {
  std::size_t total_gt = 0;
  for (const auto& img : data) total_gt += img.truths.size();
  const auto refs = score_sorted_refs(data);

  std::vector<double> precisions, recalls;
  for (std::size_t k = 1; k <= refs.size(); ++k) {
    // Rebuild the per-image prefix and match it from scratch.
    std::size_t tp = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::vector<std::size_t> order;
      for (std::size_t r = 0; r < k; ++r)
        if (refs[r].image == i) order.push_back(refs[r].index);
      tp += greedy_match_count(data[i].preds, order, data[i].truths, threshold);
    }
    precisions.push_back(static_cast<double>(tp) / static_cast<double>(k));
    recalls.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
  }

  double sum = 0.0;
  for (int g = 0; g <= 100; ++g) {
    const double level = g / 100.0;
    double best = 0.0;
    for (std::size_t k = 0; k < precisions.size(); ++k)
      if (recalls[k] >= level) best = std::max(best, precisions[k]);
    sum += best;
  }
  return sum / 101.0;
}

inline double average_recall(const std::vector<glom::ImageDetections>& data, double threshold,
                             int max_detections = 100) {
  double sum = 0.0;
  std::size_t images = 0;
  for (const auto& img : data) {
    if (img.truths.empty()) continue;
    std::vector<std::size_t> order(img.preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return img.preds[a].score > img.preds[b].score;
    });
    if (order.size() > static_cast<std::size_t>(max_detections))
      order.resize(static_cast<std::size_t>(max_detections));
    const std::size_t tp = greedy_match_count(img.preds, order, img.truths, threshold);
    sum += static_cast<double>(tp) / static_cast<double>(img.truths.size());
    ++images;
  }
  return images ? sum / static_cast<double>(images) : 0.0;
}

// Random small detection instance: <=5 predictions and <=3 truths per image.
inline std::vector<glom::ImageDetections> random_instance(glom::Rng& rng, bool allow_empty_gt) {
  const int n_images = 1 + static_cast<int>(rng.uniform_int(4));
  std::vector<glom::ImageDetections> data(n_images);
  std::size_t total_gt = 0;
  for (auto& img : data) {
    const int n_truth = static_cast<int>(rng.uniform_int(4));  // 0..3
    for (int t = 0; t < n_truth; ++t) {
      const double x = rng.uniform(0.0, 80.0);
      const double y = rng.uniform(0.0, 80.0);
      const double w = rng.uniform(5.0, 20.0);
      const double h = rng.uniform(5.0, 20.0);
      img.truths.push_back({x, y, x + w, y + h});
    }
    total_gt += img.truths.size();
    const int n_pred = static_cast<int>(rng.uniform_int(6));  // 0..5
    for (int p = 0; p < n_pred; ++p) {
      glom::BoundingBox box;
      if (!img.truths.empty() && rng.uniform() < 0.7) {
        const auto& base = img.truths[rng.uniform_int(img.truths.size())];
        const double jx = rng.uniform(-6.0, 6.0);
        const double jy = rng.uniform(-6.0, 6.0);
        const double jw = rng.uniform(0.7, 1.4);
        box = {base.x_min + jx, base.y_min + jy, base.x_min + jx + base.width() * jw,
               base.y_min + jy + base.height() * jw};
      } else {
        const double x = rng.uniform(0.0, 80.0);
        const double y = rng.uniform(0.0, 80.0);
        box = {x, y, x + rng.uniform(5.0, 20.0), y + rng.uniform(5.0, 20.0)};
      }
      // Quantized scores so ties happen and exercise the stable ordering.
      const double score = rng.uniform() < 0.3 ? rng.uniform_int(11) / 10.0 : rng.uniform();
      img.preds.push_back({box, score});
    }
  }
  if (!allow_empty_gt && total_gt == 0) {
    data[0].truths.push_back({10.0, 10.0, 30.0, 30.0});
  }
  return data;
}

}  // namespace oracle
