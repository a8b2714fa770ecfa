// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "capo/rng.hpp"

namespace capo {

std::optional<double> auc(std::span<const double> scores,
                          std::span<const int> rewards, TiePolicy ties) {
  if (scores.size() != rewards.size()) {
    throw std::invalid_argument("scores/rewards length mismatch");
  }
  std::int64_t n_pos = 0;
  for (int r : rewards) {
    if (r != 0 && r != 1) throw std::invalid_argument("rewards must be 0 or 1");
    n_pos += r;
  }
  const std::int64_t n = static_cast<std::int64_t>(scores.size());
  const std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Integer credit: 2 per strictly-won pair, plus 1 (or 0, strict) per tie.
  const std::int64_t tie_credit = ties == TiePolicy::half ? 1 : 0;
  std::int64_t credit2 = 0;
  std::int64_t neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t pos_in_bucket = 0, neg_in_bucket = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (rewards[order[j]] == 1) {
        ++pos_in_bucket;
      } else {
        ++neg_in_bucket;
      }
      ++j;
    }
    credit2 += pos_in_bucket * (2 * neg_below + tie_credit * neg_in_bucket);
    neg_below += neg_in_bucket;
    i = j;
  }
  return static_cast<double>(credit2) / static_cast<double>(2 * n_pos * n_neg);
}

AucMeanResult auc_mean(std::span<const ScoredInstance> questions, TiePolicy ties) {
  AucMeanResult res;
  double sum = 0.0;
  for (const ScoredInstance& q : questions) {
    auto a = auc(q.scores, q.rewards, ties);
    if (a) {
      sum += *a;
      ++res.n_counted;
    } else {
      ++res.n_skipped;
    }
  }
  if (res.n_counted == 0) throw std::invalid_argument("no rankable questions");
  res.value = sum / static_cast<double>(res.n_counted);
  return res;
}

double mean_at_k(std::span<const std::vector<int>> rewards_per_question) {
  if (rewards_per_question.empty()) {
    throw std::invalid_argument("no questions");
  }
  const std::size_t k = rewards_per_question.front().size();
  if (k == 0) throw std::invalid_argument("empty question");
  double sum = 0.0;
  for (const auto& rewards : rewards_per_question) {
    if (rewards.size() != k) throw std::invalid_argument("ragged response counts");
    for (int r : rewards) sum += r;
  }
  return sum / static_cast<double>(k * rewards_per_question.size());
}

std::vector<PcPoint> precision_coverage(
    std::span<const std::pair<double, int>> items) {
  if (items.empty()) throw std::invalid_argument("no items");
  std::vector<std::pair<double, int>> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t n = sorted.size();
  // Suffix sums of answered counts/rewards for each distinct threshold.
  std::vector<PcPoint> curve;
  std::size_t i = 0;
  std::size_t answered = n;
  std::int64_t reward_sum = 0;
  for (const auto& [c, r] : sorted) reward_sum += r;
  while (i < n) {
    curve.push_back(PcPoint{
        static_cast<double>(answered) / static_cast<double>(n),
        static_cast<double>(reward_sum) / static_cast<double>(answered)});
    // Drop the bucket of items tied at this threshold.
    std::size_t j = i;
    while (j < n && sorted[j].first == sorted[i].first) {
      reward_sum -= sorted[j].second;
      --answered;
      ++j;
    }
    i = j;
  }
  return curve;
}

double precision_at_coverage(std::span<const PcPoint> curve, double target) {
  if (curve.empty()) throw std::invalid_argument("empty curve");
  double precision = curve.front().precision;
  for (const PcPoint& p : curve) {
    if (p.coverage >= target) {
      precision = p.precision;
    } else {
      break;
    }
  }
  return precision;
}

namespace {

// Random realizable instance: distinct scores on a coarse grid (so scaling
// by alpha keeps the order exact), arbitrary labels with both classes.
ScoredInstance random_instance(Rng& rng, bool distinct_scores) {
  const int n = static_cast<int>(rng.uniform_int(2, 20));
  ScoredInstance inst;
  inst.scores.reserve(static_cast<std::size_t>(n));
  inst.rewards.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = static_cast<double>(rng.uniform_int(-4000, 4000)) / 16.0;
    if (distinct_scores) {
      while (std::find(inst.scores.begin(), inst.scores.end(), s) !=
             inst.scores.end()) {
        s = static_cast<double>(rng.uniform_int(-4000, 4000)) / 16.0;
      }
    }
    inst.scores.push_back(s);
    inst.rewards.push_back(static_cast<int>(rng.uniform_int(0, 1)));
  }
  // Force both classes.
  inst.rewards[0] = 1;
  inst.rewards[static_cast<std::size_t>(n) - 1] = 0;
  return inst;
}

}  // namespace

RegretBoundReport regret_bound_check(std::size_t n_instances,
                                     const SurrogateKind& kind,
                                     std::uint64_t seed) {
  if (kind.family == SurrogateFamily::linear) {
    throw std::invalid_argument("no regret bound for inconsistent surrogate");
  }
  const double factor =
      kind.family == SurrogateFamily::logistic ? 1.0 / std::log(2.0) : 1.0;
  Rng rng(seed);
  RegretBoundReport report;
  report.n_instances = n_instances;
  for (std::size_t t = 0; t < n_instances; ++t) {
    ScoredInstance inst = random_instance(rng, /*distinct_scores=*/true);
    // Realizable setting: L* = -1 (a perfect ranker exists), L_phi* = 0.
    const double lhs = true_auc_risk(inst) - (-1.0);
    const double rhs = factor * (surrogate_risk(inst, kind) - 0.0);
    if (lhs > rhs * (1.0 + 1e-12)) ++report.n_violations;
    if (rhs > 0.0) {
      report.max_slack_ratio = std::max(report.max_slack_ratio, lhs / rhs);
    }
  }
  return report;
}

ScalingCheckReport scaling_counterexample_check(std::size_t n_trials,
                                                std::uint64_t seed) {
  Rng rng(seed);
  ScalingCheckReport report;
  report.n_trials = n_trials;
  const double alphas[] = {0.1, 10.0, 1000.0};
  const SurrogateKind lin = SurrogateKind::linear();
  const SurrogateKind logi = SurrogateKind::logistic(1.0);
  for (std::size_t t = 0; t < n_trials; ++t) {
    ScoredInstance inst = random_instance(rng, /*distinct_scores=*/false);
    const auto base_auc = auc(inst.scores, inst.rewards);
    const double base_lin = surrogate_risk(inst, lin);
    for (double alpha : alphas) {
      ScoredInstance scaled = inst;
      for (double& s : scaled.scores) s *= alpha;
      if (auc(scaled.scores, scaled.rewards) != base_auc) ++report.auc_mismatches;
      const double lin_scaled = surrogate_risk(scaled, lin);
      const double expect = alpha * base_lin;
      const double denom = std::max(std::abs(expect), 1e-30);
      if (std::abs(lin_scaled - expect) / denom > 1e-9) {
        ++report.linear_scale_failures;
      }
      if (surrogate_risk(scaled, logi) < 0.0) ++report.logistic_negative;
    }
  }
  return report;
}

std::string report_to_json(const CalibrationReport& report) {
  nlohmann::json j;
  if (report.auc_mean) {
    j["auc_mean"] = *report.auc_mean;
  } else {
    j["auc_mean"] = nullptr;
  }
  j["n_questions_counted"] = report.n_questions_counted;
  j["n_questions_skipped"] = report.n_questions_skipped;
  j["mean_at_k"] = report.mean_at_k;
  if (report.tts_accuracy) {
    j["tts_accuracy"] = *report.tts_accuracy;
  } else {
    j["tts_accuracy"] = nullptr;
  }
  nlohmann::json per_q = nlohmann::json::object();
  for (const auto& [qid, a] : report.per_question_auc) {
    if (a) {
      per_q[std::to_string(qid)] = *a;
    } else {
      per_q[std::to_string(qid)] = nullptr;
    }
  }
  j["per_question_auc"] = per_q;
  nlohmann::json curve = nlohmann::json::array();
  for (const PcPoint& p : report.pc_curve) {
    curve.push_back({p.coverage, p.precision});
  }
  j["pc_curve"] = curve;
  return j.dump(2);
}

void write_pc_curve_csv(std::ostream& out, std::span<const PcPoint> curve) {
  out << "coverage,precision\n";
  char buf[64];
  for (const PcPoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.coverage, p.precision);
    out << buf;
  }
}

}  // namespace capo
