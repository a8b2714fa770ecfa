// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <span>
#include <vector>

namespace capo {

enum class SurrogateFamily { logistic, exponential, hinge, squared, linear };

/// A member of the pairwise surrogate family phi applied to score gaps
/// t = f(o_i) - f(o_j) of (correct, incorrect) response pairs.
///
/// logistic carries a temperature tau > 0: phi_tau(t) = log(1 + exp(-t/tau)).
/// linear means phi(t) = -t, the surrogate implied by reward-only advantages.
struct SurrogateKind {
  SurrogateFamily family = SurrogateFamily::logistic;
  double tau = 1.0;
  // When set, the logistic derivative carries the exact 1/tau chain factor.
  // Off by default: the advantage definition uses -sigmoid(-t/tau) verbatim,
  // which only rescales the effective learning rate.
  bool logistic_exact_grad = false;

  static SurrogateKind logistic(double tau, bool exact_grad = false);
  static SurrogateKind exponential();
  static SurrogateKind hinge();
  static SurrogateKind squared();
  static SurrogateKind linear();
};

/// Scores with binary labels; the empirical instance risks are computed on.
struct ScoredInstance {
  std::vector<double> scores;
  std::vector<int> rewards;
};

/// Throws unless scores/rewards align, length >= 2, rewards binary.
void validate(const ScoredInstance& inst);

std::size_t count_positives(const ScoredInstance& inst);

/// Surrogate value phi(t). Stable for |t/tau| up to ~700 (softplus form).
double phi(const SurrogateKind& kind, double t);

/// Derivative (subgradient at the hinge kink, chosen 0 from the flat side).
/// For logistic the default is -sigmoid(-t/tau) without the 1/tau factor;
/// see SurrogateKind::logistic_exact_grad.
double phi_prime(const SurrogateKind& kind, double t);

/// Mean of phi(f_pos - f_neg) over all cross-class ordered pairs.
/// Errors with "degenerate instance" when only one class is present.
double surrogate_risk(const ScoredInstance& inst, const SurrogateKind& kind);

/// -AUC of the instance (ties credited 0.5). Errors on one-class instances.
double true_auc_risk(const ScoredInstance& inst);

/// Whether the surrogate is consistent with AUC optimization: true for
/// logistic/exponential (convex, differentiable, non-increasing, phi'(0)<0)
/// and for hinge/squared; false for linear.
bool is_consistent(const SurrogateKind& kind);

double sigmoid(double x);

}  // namespace capo
