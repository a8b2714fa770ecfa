// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <span>
#include <vector>

#include "capo/types.hpp"

namespace capo {

/// Reference-PPL masking thresholds. Correct responses are kept while
/// ppl_ref <= ref_high; incorrect responses are kept while ppl_ref >= ref_low.
struct MaskConfig {
  double ref_high = 2.5;
  double ref_low = 1.05;
};

void validate(const MaskConfig& cfg);

/// How masked responses interact with the pairwise sums:
/// multiplicative zeroes only a masked response's own advantage, leaving it
/// in place as a peer; exclusive removes it from the peer sums as well.
enum class PeerMode { multiplicative, exclusive };

/// One advantage value per response of a group.
using AdvantageVector = std::vector<double>;

/// Group-relative advantage: R_i - mean(R), optionally divided by the
/// population std of R. All-equal reward groups yield the zero vector.
AdvantageVector grpo_advantage(std::span<const int> rewards, bool use_std);

/// Uncertainty-aware advantage from the logistic pairwise surrogate:
/// correct responses get -sum over incorrect peers of phi'(lpm_i - lpm_j),
/// incorrect responses get +sum over correct peers of phi'(lpm_j - lpm_i),
/// with phi' = -sigmoid(-t/tau). Groups lacking one class get zeros.
///
/// mean_over_peers divides each response's sum by its opposite-class count;
/// off by default (the estimator sums over peers verbatim).
/// exact_grad applies the 1/tau chain factor to phi'.
AdvantageVector capo_advantage(std::span<const double> lpms,
                               std::span<const int> rewards, double tau,
                               bool mean_over_peers = false,
                               bool exact_grad = false);

/// Keep/drop decision for one response: 1 = keep.
int ref_mask(int reward, double ppl_ref, const MaskConfig& cfg);

/// capo_advantage over a group with reference-PPL masking applied per
/// PeerMode. lpms come from logp_old, ppl_ref from logp_ref (required).
AdvantageVector capo_masked_advantage(const Group& group, double tau,
                                      const MaskConfig& cfg,
                                      PeerMode peer_mode = PeerMode::multiplicative,
                                      bool mean_over_peers = false,
                                      bool exact_grad = false);

struct CurvePoint {
  double gap = 0.0;
  double magnitude = 0.0;
};

/// |advantage| contributed by one correct-incorrect pair as a function of
/// their confidence gap: sigma(-gap/tau), monotone decreasing.
std::vector<CurvePoint> advantage_curve(double gap_min, double gap_max,
                                        std::size_t steps, double tau);

}  // namespace capo
