// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "capo/advantage.hpp"
#include "capo/metrics.hpp"
#include "capo/objective.hpp"
#include "capo/toyenv.hpp"

namespace capo {

enum class Algo { grpo, capo };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& name);

struct TrainConfig {
  Algo algo = Algo::grpo;
  int group_size = 8;
  int batch_questions = 32;
  int mini_batch = 16;
  double clip_eps = 0.2;
  double kl_coeff = 0.0;
  double learning_rate = 6.0;
  double tau = 0.6;
  bool mask_enabled = false;
  MaskConfig mask;
  bool use_std = false;
  PeerMode peer_mode = PeerMode::multiplicative;
  bool mean_over_peers = false;
  bool logistic_exact_grad = false;
  int inner_epochs = 1;
  int total_steps = 600;
  int eval_every = 20;
  double rollout_temperature = 1.0;
  int eval_rollout_n = 16;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

/// One evaluation checkpoint along training. train_accuracy and
/// masked_fraction are means over the training rollouts since the previous
/// record; the step-0 row carries the eval accuracy in train_accuracy.
struct EvalRecord {
  int step = 0;
  double train_accuracy = 0.0;
  double eval_accuracy = 0.0;
  double auc_mean = 0.0;  // NaN when no question is rankable
  double policy_entropy = 0.0;
  double masked_fraction = 0.0;
};

struct TrainHistory {
  std::vector<EvalRecord> records;
};

struct TrainResult {
  PolicyParams params;
  TrainHistory history;
};

/// Trains the policy from `reference` (which doubles as the initial policy
/// and as the frozen masking/KL anchor) with plain gradient ascent on the
/// clipped objective. Deterministic per config.
TrainResult train(const ToyTask& task, const PolicyParams& reference,
                  const TrainConfig& cfg);

/// Samples n responses per question at temperature 1.0 and computes the full
/// calibration report with f = lpm, including answer-selection accuracy.
/// Deterministic per seed.
CalibrationReport evaluate(const PolicyParams& params, const ToyTask& task,
                           int n, std::uint64_t seed);

/// Mean Shannon entropy (nats) of the per-(question, position) distributions.
double policy_entropy(const PolicyParams& params);

/// CSV columns: step,train_accuracy,eval_accuracy,auc_mean,policy_entropy,
/// masked_fraction.
void write_history_csv(std::ostream& out, const TrainHistory& history);

}  // namespace capo
