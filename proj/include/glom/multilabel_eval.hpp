#pragma once

#include <vector>

#include <glom/labels.hpp>

namespace glom {

struct MultiLabelMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Example-based multi-label metrics, averaged over samples:
//   accuracy  = |pred n true| / |pred u true|   (0 when the union is empty)
//   precision = |pred n true| / |pred|          (0 when pred is empty)
//   recall    = |pred n true| / |true|          (0 when true is empty)
inline MultiLabelMetrics multilabel_metrics(const std::vector<LabelSet>& pred_sets,
                                            const std::vector<LabelSet>& true_sets) {
  if (pred_sets.size() != true_sets.size())
    throw InvalidArgument("multilabel_metrics: prediction/truth length mismatch");
  MultiLabelMetrics m;
  if (pred_sets.empty()) return m;
  double acc = 0.0, prec = 0.0, rec = 0.0;
  for (std::size_t i = 0; i < pred_sets.size(); ++i) {
    const double inter = (pred_sets[i] & true_sets[i]).size();
    const double uni = (pred_sets[i] | true_sets[i]).size();
    const double np = pred_sets[i].size();
    const double nt = true_sets[i].size();
    acc += uni > 0 ? inter / uni : 0.0;
    prec += np > 0 ? inter / np : 0.0;
    rec += nt > 0 ? inter / nt : 0.0;
  }
  const double n = static_cast<double>(pred_sets.size());
  m.accuracy = acc / n;
  m.precision = prec / n;
  m.recall = rec / n;
  return m;
}

}  // namespace glom
