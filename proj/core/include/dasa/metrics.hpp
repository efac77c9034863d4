#pragma once

#include <span>
#include <string>
#include <vector>

namespace dasa {

// Binary cross-entropy, probabilities clipped to [1e-7, 1-1e-7] before the
// logarithms.
double logloss(std::span<const double> probs, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;  // threshold sweep from (0,0) to (1,1)
  double auc = 0.0;
};

// ROC by sweeping all distinct thresholds, AUC by the trapezoidal rule. The
// accumulation is integer-exact, so the AUC equals the tie-corrected
// Mann-Whitney rank statistic. Both classes must be present.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

struct PerImageMetric {
  std::string image_id;
  double logloss = 0.0;
  double auc = 0.0;
};

struct MetricReport {
  double logloss_mean = 0.0;
  double logloss_std = 0.0;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  std::vector<PerImageMetric> per_image;

  // mean and sample standard deviation across images
  static MetricReport from_per_image(std::vector<PerImageMetric> rows);
};

}  // namespace dasa
