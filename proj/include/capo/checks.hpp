// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <string>

namespace capo {

struct CheckReport {
  std::string name;
  std::size_t n_run = 0;
  std::size_t n_failed = 0;
  double max_err = 0.0;

  bool ok() const { return n_failed == 0; }
};

/// analytic_gradient vs central finite differences of batch_objective
/// (h = 1e-5) on random instances with random clip/KL settings and
/// theta != theta_old. Fails a parameter when the relative error (floored
/// at 1e-8 absolute) exceeds 1e-6.
CheckReport check_gradients(std::size_t n_instances, std::uint64_t seed);

/// pairwise_grpo_gradient == G^2 * reinforce_gradient(grpo_advantage,
/// use_std=false) on random groups; tolerance 1e-10 relative.
CheckReport check_grpo_identity(std::size_t n_groups, std::uint64_t seed);

/// pairwise_logistic_gradient == reinforce_gradient(capo_advantage) on
/// random groups; tolerance 1e-10 relative.
CheckReport check_logistic_identity(std::size_t n_groups, std::uint64_t seed);

/// At theta = theta_old the clipped-objective gradient equals the REINFORCE
/// form for arbitrary advantage vectors; tolerance 1e-10 relative.
CheckReport check_clip_reinforce_identity(std::size_t n_instances,
                                          std::uint64_t seed);

/// Sort-based auc vs O(n^2) pair enumeration, exact equality, with tie-heavy
/// instances included.
CheckReport check_auc_oracle(std::size_t n_instances, std::uint64_t seed);

/// select_answer vs a brute-force grouping-and-summation oracle, exact
/// equality, with forced confidence ties included.
CheckReport check_tts_oracle(std::size_t n_sets, std::uint64_t seed);

}  // namespace capo
