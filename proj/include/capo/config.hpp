// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <string>

#include "capo/toyenv.hpp"
#include "capo/trainer.hpp"

namespace capo {

/// Base-policy construction parameters.
struct ReferenceConfig {
  double bias_strength = 4.2164;
  double smoothing = 0.03;
};

/// One declarative run description: the task, the reference construction,
/// the training configuration, and where outputs go. Every field has a
/// default; a config file may specify any subset.
struct RunConfig {
  TaskSpec task;
  ReferenceConfig reference;
  TrainConfig train;
  std::string out_dir = "runs/latest";
};

/// Parse from JSON text. Unknown or ill-typed fields raise
/// std::invalid_argument with the offending field path.
RunConfig run_config_from_json_text(const std::string& text);

/// Serialize with every field explicit; parse(serialize(c)) == c.
std::string run_config_to_json_text(const RunConfig& cfg);

bool operator==(const ReferenceConfig& a, const ReferenceConfig& b);
bool operator==(const TaskSpec& a, const TaskSpec& b);
bool operator==(const MaskConfig& a, const MaskConfig& b);
bool operator==(const TrainConfig& a, const TrainConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace capo
