// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "capo/advantage.hpp"
#include "capo/toyenv.hpp"
#include "capo/types.hpp"

namespace capo {

struct ObjectiveConfig {
  double clip_eps = 0.2;
  double kl_coeff = 0.0;
  bool token_mean = true;  // per-response 1/|o_i| averaging
};

void validate(const ObjectiveConfig& cfg);

/// Per-parameter partials aligned with the PolicyParams logits layout.
using GradientVector = std::vector<double>;

/// Policy ratio exp(logp_new - logp_old).
double token_ratio(double logp_new, double logp_old);

/// PPO min-clip term: min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv).
double clipped_term(double ratio, double adv, double eps);

/// k3 KL estimator: r - log(r) - 1 with r = exp(logp_ref - logp_theta); >= 0.
double kl_k3(double logp_ref, double logp_theta);

/// Clipped policy objective: mean over groups of
/// (1/G) sum_i (1/|o_i|) sum_t [clipped_term - kl_coeff * kl_k3].
/// Advantages are per-response, aligned with the groups.
double batch_objective(std::span<const Group> groups,
                       std::span<const AdvantageVector> advantages,
                       const PolicyParams& params, const ObjectiveConfig& cfg);

/// Exact gradient of batch_objective w.r.t. the tabular logits. The min/clip
/// composition uses active-branch subgradients; at exact branch boundaries
/// the unclipped branch is taken. Accumulation order is fixed, so repeated
/// calls are bit-identical.
GradientVector analytic_gradient(std::span<const Group> groups,
                                 std::span<const AdvantageVector> advantages,
                                 const PolicyParams& params,
                                 const ObjectiveConfig& cfg);

/// REINFORCE-style gradient: mean over groups of (1/G) sum_i A_i grad lpm(o_i),
/// with lpm evaluated under `params`.
GradientVector reinforce_gradient(std::span<const Group> groups,
                                  std::span<const AdvantageVector> advantages,
                                  const PolicyParams& params);

/// Unscaled pairwise form of the group-relative gradient:
/// sum_{i<j} (grad lpm_i - grad lpm_j)(R_i - R_j), enumerated literally.
/// Equals G^2 * reinforce_gradient(grpo_advantage, use_std=false).
GradientVector pairwise_grpo_gradient(const Group& group,
                                      const PolicyParams& params);

/// Gradient of the empirical pairwise logistic objective
/// -(1/G) sum_{pos,neg} phi(lpm_pos - lpm_neg): equals
/// reinforce_gradient with capo_advantage to round-off. Single-class groups
/// give the zero vector.
GradientVector pairwise_logistic_gradient(const Group& group,
                                          const PolicyParams& params,
                                          double tau);

/// Symmetric order-2 kernel over (lpm, reward) pairs.
using PairKernel = std::function<double(double lpm_a, int reward_a,
                                        double lpm_b, int reward_b)>;

struct UStatReport {
  std::size_t n_groups = 0;
  std::size_t n_pairs = 0;
  double group_mean = 0.0;
  double group_se = 0.0;
  double pair_mean = 0.0;
  double pair_se = 0.0;
  double z_score = 0.0;
};

/// Compares the order-2 U-statistic averaged over the first half of the
/// groups with a Monte-Carlo estimate over disjoint (hence independent)
/// response pairs drawn from the second half. Requires >= 1000 groups whose
/// members are i.i.d. draws from one distribution.
UStatReport u_statistic_check(std::span<const ScoredInstance> groups,
                              const PairKernel& kernel);

}  // namespace capo
