#include "dasa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dasa/sae_dnn.hpp"

namespace dasa {

double logloss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.empty()) {
    throw std::invalid_argument("logloss: empty input");
  }
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("logloss: " + std::to_string(probs.size()) +
                                " probs vs " + std::to_string(labels.size()) +
                                " labels");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = clip_prob(probs[i]);
    sum += labels[i] != 0 ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / static_cast<double>(probs.size());
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: empty or misaligned inputs");
  }
  std::size_t n_pos = 0;
  for (int lab : labels) {
    n_pos += lab != 0 ? 1 : 0;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present (got " +
                                std::to_string(n_pos) + " positives, " +
                                std::to_string(n_neg) + " negatives)");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocResult out;
  out.points.push_back({0.0, 0.0});

  // Tied scores form one sweep group; twice the trapezoid area stays integral.
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t area2 = 0;  // sum of dFP * (TP_prev + TP_cur)
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    const std::uint64_t tp_prev = tp;
    const std::uint64_t fp_prev = fp;
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] != 0) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    area2 += (fp - fp_prev) * (tp_prev + tp);
    out.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                          static_cast<double>(tp) / static_cast<double>(n_pos)});
  }

  out.auc = static_cast<double>(area2) /
            (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return out;
}

MetricReport MetricReport::from_per_image(std::vector<PerImageMetric> rows) {
  if (rows.empty()) {
    throw std::invalid_argument("MetricReport: no per-image rows");
  }
  MetricReport rep;
  rep.per_image = std::move(rows);
  const double n = static_cast<double>(rep.per_image.size());
  for (const PerImageMetric& m : rep.per_image) {
    rep.logloss_mean += m.logloss;
    rep.auc_mean += m.auc;
  }
  rep.logloss_mean /= n;
  rep.auc_mean /= n;
  if (rep.per_image.size() > 1) {
    double var_l = 0.0;
    double var_a = 0.0;
    for (const PerImageMetric& m : rep.per_image) {
      var_l += (m.logloss - rep.logloss_mean) * (m.logloss - rep.logloss_mean);
      var_a += (m.auc - rep.auc_mean) * (m.auc - rep.auc_mean);
    }
    rep.logloss_std = std::sqrt(var_l / (n - 1.0));
    rep.auc_std = std::sqrt(var_a / (n - 1.0));
  }
  return rep;
}

}  // namespace dasa
