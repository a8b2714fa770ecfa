// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/advantage.hpp"

#include <cmath>
#include <stdexcept>

#include "capo/surrogate.hpp"

namespace capo {

void validate(const MaskConfig& cfg) {
  if (!(cfg.ref_low >= 1.0) || !(cfg.ref_low < cfg.ref_high)) {
    throw std::invalid_argument("mask thresholds need 1 <= ref_low < ref_high");
  }
}

AdvantageVector grpo_advantage(std::span<const int> rewards, bool use_std) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group needs at least two responses");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (int r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (int r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  AdvantageVector out(rewards.size(), 0.0);
  if (var == 0.0) return out;  // no group-relative signal
  const double scale = use_std ? 1.0 / std::sqrt(var) : 1.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = (rewards[i] - mean) * scale;
  }
  return out;
}

namespace {

AdvantageVector capo_advantage_masked_peers(std::span<const double> lpms,
                                            std::span<const int> rewards,
                                            std::span<const int> peer_keep,
                                            double tau, bool mean_over_peers,
                                            bool exact_grad) {
  if (lpms.size() != rewards.size()) {
    throw std::invalid_argument("lpms/rewards length mismatch");
  }
  if (lpms.size() < 2) {
    throw std::invalid_argument("group needs at least two responses");
  }
  const SurrogateKind kind = SurrogateKind::logistic(tau, exact_grad);
  AdvantageVector out(lpms.size(), 0.0);
  for (std::size_t i = 0; i < lpms.size(); ++i) {
    double sum = 0.0;
    std::size_t n_peers = 0;
    for (std::size_t j = 0; j < lpms.size(); ++j) {
      if (rewards[j] == rewards[i]) continue;
      if (!peer_keep.empty() && peer_keep[j] == 0) continue;
      ++n_peers;
      if (rewards[i] == 1) {
        sum += -phi_prime(kind, lpms[i] - lpms[j]);
      } else {
        sum += phi_prime(kind, lpms[j] - lpms[i]);
      }
    }
    if (n_peers > 0 && mean_over_peers) sum /= static_cast<double>(n_peers);
    out[i] = sum;
  }
  return out;
}

}  // namespace

AdvantageVector capo_advantage(std::span<const double> lpms,
                               std::span<const int> rewards, double tau,
                               bool mean_over_peers, bool exact_grad) {
  return capo_advantage_masked_peers(lpms, rewards, {}, tau, mean_over_peers,
                                     exact_grad);
}

int ref_mask(int reward, double ppl_ref, const MaskConfig& cfg) {
  if (reward == 1) return ppl_ref <= cfg.ref_high ? 1 : 0;
  return ppl_ref >= cfg.ref_low ? 1 : 0;
}

AdvantageVector capo_masked_advantage(const Group& group, double tau,
                                      const MaskConfig& cfg, PeerMode peer_mode,
                                      bool mean_over_peers, bool exact_grad) {
  validate(cfg);
  const std::size_t n = group.responses.size();
  std::vector<double> lpms(n);
  std::vector<int> rewards(n);
  std::vector<int> keep(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Response& r = group.responses[i];
    lpms[i] = lpm(r.logp_old);
    rewards[i] = r.reward;
    keep[i] = ref_mask(r.reward, ref_ppl(r), cfg);
  }
  AdvantageVector adv =
      peer_mode == PeerMode::multiplicative
          ? capo_advantage_masked_peers(lpms, rewards, {}, tau, mean_over_peers,
                                        exact_grad)
          : capo_advantage_masked_peers(lpms, rewards, keep, tau,
                                        mean_over_peers, exact_grad);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i] == 0) adv[i] = 0.0;
  }
  return adv;
}

std::vector<CurvePoint> advantage_curve(double gap_min, double gap_max,
                                        std::size_t steps, double tau) {
  if (!(gap_min < gap_max) || steps < 2) {
    throw std::invalid_argument("curve needs gap_min < gap_max and steps >= 2");
  }
  std::vector<CurvePoint> out;
  out.reserve(steps);
  const double h = (gap_max - gap_min) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double gap = gap_min + h * static_cast<double>(i);
    out.push_back(CurvePoint{gap, sigmoid(-gap / tau)});
  }
  return out;
}

}  // namespace capo
