// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capo/surrogate.hpp"

namespace capo {

/// Tie handling for AUC. half credits tied cross-class pairs 0.5
/// (Mann-Whitney convention, the default); strict credits them 0.
enum class TiePolicy { half, strict };

/// Probability that a positive outranks a negative: over all cross-class
/// pairs credit 1 when the positive scores strictly higher, 0.5 on ties
/// (under TiePolicy::half), else 0. nullopt when only one class is present.
///
/// Implemented as a sort-based sweep that accumulates integer credit, so it
/// agrees bit-for-bit with brute-force pair enumeration.
std::optional<double> auc(std::span<const double> scores,
                          std::span<const int> rewards,
                          TiePolicy ties = TiePolicy::half);

struct AucMeanResult {
  double value = 0.0;
  std::size_t n_counted = 0;
  std::size_t n_skipped = 0;
};

/// Mean per-question AUC over questions where it is defined; counts the
/// skipped (single-class) questions. Errors with "no rankable questions"
/// when every question is single-class.
AucMeanResult auc_mean(std::span<const ScoredInstance> questions,
                       TiePolicy ties = TiePolicy::half);

/// Mean reward over all responses of |Q| questions with exactly k responses
/// each. Errors on ragged input.
double mean_at_k(std::span<const std::vector<int>> rewards_per_question);

struct PcPoint {
  double coverage = 0.0;
  double precision = 0.0;
};

/// Precision-coverage curve: thresholds sweep the sorted distinct
/// confidences; at each, coverage = fraction answered (confidence >=
/// threshold) and precision = mean reward among answered. Points are in
/// threshold-ascending order, so coverage is weakly decreasing; the first
/// point is full coverage.
std::vector<PcPoint> precision_coverage(
    std::span<const std::pair<double, int>> items);

/// Precision of the last curve point whose coverage is >= target, i.e. the
/// strictest abstention threshold that still answers the target fraction.
double precision_at_coverage(std::span<const PcPoint> curve, double target);

struct RegretBoundReport {
  std::size_t n_instances = 0;
  std::size_t n_violations = 0;
  double max_slack_ratio = 0.0;  // max of LHS/RHS over instances with RHS > 0
};

/// Checks the surrogate regret bound L(f) - L* <= c (L_phi(f) - L_phi*) on
/// random realizable instances with distinct scores: c = 1/ln2 for logistic,
/// 1 for exponential/hinge/squared, with L* = -1 and L_phi* = 0 (optimal
/// values on realizable instances under margin-scaled perfect rankers).
/// Errors for the linear surrogate, which admits no such bound.
RegretBoundReport regret_bound_check(std::size_t n_instances,
                                     const SurrogateKind& kind,
                                     std::uint64_t seed);

struct ScalingCheckReport {
  std::size_t n_trials = 0;
  std::size_t auc_mismatches = 0;       // auc(alpha f) != auc(f) exactly
  std::size_t linear_scale_failures = 0;  // |L(alpha f) - alpha L(f)| rel > 1e-9
  std::size_t logistic_negative = 0;     // logistic risk < 0 under scaling
};

/// Exercises the scale counterexample for the linear surrogate: for alpha in
/// {0.1, 10, 1000}, AUC is exactly scale-invariant while the linear risk
/// scales by alpha; the logistic risk stays bounded below by 0.
ScalingCheckReport scaling_counterexample_check(std::size_t n_trials,
                                                std::uint64_t seed);

/// Calibration summary of one evaluation pass.
struct CalibrationReport {
  std::map<std::int64_t, std::optional<double>> per_question_auc;
  std::optional<double> auc_mean;  // nullopt when no question is rankable
  std::size_t n_questions_counted = 0;
  std::size_t n_questions_skipped = 0;
  double mean_at_k = 0.0;
  std::vector<PcPoint> pc_curve;  // per-response confidence = lpm
  std::optional<double> tts_accuracy;
};

std::string report_to_json(const CalibrationReport& report);
void write_pc_curve_csv(std::ostream& out, std::span<const PcPoint> curve);

}  // namespace capo
