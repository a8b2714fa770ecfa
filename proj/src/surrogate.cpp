// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include "capo/metrics.hpp"

namespace capo {

SurrogateKind SurrogateKind::logistic(double tau, bool exact_grad) {
  if (!(tau > 0.0)) throw std::invalid_argument("logistic tau must be > 0");
  return SurrogateKind{SurrogateFamily::logistic, tau, exact_grad};
}
SurrogateKind SurrogateKind::exponential() {
  return SurrogateKind{SurrogateFamily::exponential, 1.0, false};
}
SurrogateKind SurrogateKind::hinge() {
  return SurrogateKind{SurrogateFamily::hinge, 1.0, false};
}
SurrogateKind SurrogateKind::squared() {
  return SurrogateKind{SurrogateFamily::squared, 1.0, false};
}
SurrogateKind SurrogateKind::linear() {
  return SurrogateKind{SurrogateFamily::linear, 1.0, false};
}

void validate(const ScoredInstance& inst) {
  if (inst.scores.size() != inst.rewards.size()) {
    throw std::invalid_argument("scores/rewards length mismatch");
  }
  if (inst.scores.size() < 2) {
    throw std::invalid_argument("instance needs at least two items");
  }
  for (int r : inst.rewards) {
    if (r != 0 && r != 1) throw std::invalid_argument("rewards must be 0 or 1");
  }
}

std::size_t count_positives(const ScoredInstance& inst) {
  std::size_t n = 0;
  for (int r : inst.rewards) n += static_cast<std::size_t>(r);
  return n;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// softplus(x) = log(1 + e^x), overflow-safe.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double phi(const SurrogateKind& kind, double t) {
  switch (kind.family) {
    case SurrogateFamily::logistic:
      return softplus(-t / kind.tau);
    case SurrogateFamily::exponential:
      return std::exp(-t);
    case SurrogateFamily::hinge:
      return std::max(0.0, 1.0 - t);
    case SurrogateFamily::squared:
      return (1.0 - t) * (1.0 - t);
    case SurrogateFamily::linear:
      return -t;
  }
  throw std::logic_error("unknown surrogate family");
}

double phi_prime(const SurrogateKind& kind, double t) {
  switch (kind.family) {
    case SurrogateFamily::logistic: {
      double d = -sigmoid(-t / kind.tau);
      return kind.logistic_exact_grad ? d / kind.tau : d;
    }
    case SurrogateFamily::exponential:
      return -std::exp(-t);
    case SurrogateFamily::hinge:
      return t < 1.0 ? -1.0 : 0.0;
    case SurrogateFamily::squared:
      return 2.0 * (t - 1.0);
    case SurrogateFamily::linear:
      return -1.0;
  }
  throw std::logic_error("unknown surrogate family");
}

double surrogate_risk(const ScoredInstance& inst, const SurrogateKind& kind) {
  validate(inst);
  const std::size_t n_pos = count_positives(inst);
  const std::size_t n_neg = inst.rewards.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("degenerate instance");
  double sum = 0.0;
  for (std::size_t i = 0; i < inst.scores.size(); ++i) {
    if (inst.rewards[i] != 1) continue;
    for (std::size_t j = 0; j < inst.scores.size(); ++j) {
      if (inst.rewards[j] != 0) continue;
      sum += phi(kind, inst.scores[i] - inst.scores[j]);
    }
  }
  return sum / static_cast<double>(n_pos * n_neg);
}

double true_auc_risk(const ScoredInstance& inst) {
  validate(inst);
  auto a = auc(inst.scores, inst.rewards);
  if (!a) throw std::invalid_argument("degenerate instance");
  return -*a;
}

bool is_consistent(const SurrogateKind& kind) {
  return kind.family != SurrogateFamily::linear;
}

}  // namespace capo
