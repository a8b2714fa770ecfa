// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/config.hpp"

#include <stdexcept>

#include <json.hpp>

namespace capo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(path + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

void read_task(const json& j, TaskSpec& t) {
  check_keys(j, "task",
             {"n_questions", "answer_len", "vocab", "hard_fraction", "seed"});
  read(j, "task", "n_questions", t.n_questions);
  read(j, "task", "answer_len", t.answer_len);
  read(j, "task", "vocab", t.vocab);
  read(j, "task", "hard_fraction", t.hard_fraction);
  read(j, "task", "seed", t.seed);
}

void read_reference(const json& j, ReferenceConfig& r) {
  check_keys(j, "reference", {"bias_strength", "smoothing"});
  read(j, "reference", "bias_strength", r.bias_strength);
  read(j, "reference", "smoothing", r.smoothing);
}

void read_mask(const json& j, TrainConfig& t) {
  check_keys(j, "train.mask", {"enabled", "ref_high", "ref_low"});
  read(j, "train.mask", "enabled", t.mask_enabled);
  read(j, "train.mask", "ref_high", t.mask.ref_high);
  read(j, "train.mask", "ref_low", t.mask.ref_low);
}

void read_train(const json& j, TrainConfig& t) {
  check_keys(j, "train",
             {"algo", "group_size", "batch_questions", "mini_batch", "clip_eps",
              "kl_coeff", "learning_rate", "tau", "mask", "use_std", "peer_mode",
              "mean_over_peers", "logistic_exact_grad", "inner_epochs",
              "total_steps", "eval_every", "rollout_temperature",
              "eval_rollout_n", "seed"});
  if (j.contains("algo")) {
    std::string algo;
    read(j, "train", "algo", algo);
    try {
      t.algo = algo_from_string(algo);
    } catch (const std::invalid_argument&) {
      fail("train.algo", "expected \"grpo\" or \"capo\"");
    }
  }
  read(j, "train", "group_size", t.group_size);
  read(j, "train", "batch_questions", t.batch_questions);
  read(j, "train", "mini_batch", t.mini_batch);
  read(j, "train", "clip_eps", t.clip_eps);
  read(j, "train", "kl_coeff", t.kl_coeff);
  read(j, "train", "learning_rate", t.learning_rate);
  read(j, "train", "tau", t.tau);
  if (j.contains("mask")) read_mask(j.at("mask"), t);
  read(j, "train", "use_std", t.use_std);
  if (j.contains("peer_mode")) {
    std::string mode;
    read(j, "train", "peer_mode", mode);
    if (mode == "multiplicative") {
      t.peer_mode = PeerMode::multiplicative;
    } else if (mode == "exclusive") {
      t.peer_mode = PeerMode::exclusive;
    } else {
      fail("train.peer_mode", "expected \"multiplicative\" or \"exclusive\"");
    }
  }
  read(j, "train", "mean_over_peers", t.mean_over_peers);
  read(j, "train", "logistic_exact_grad", t.logistic_exact_grad);
  read(j, "train", "inner_epochs", t.inner_epochs);
  read(j, "train", "total_steps", t.total_steps);
  read(j, "train", "eval_every", t.eval_every);
  read(j, "train", "rollout_temperature", t.rollout_temperature);
  read(j, "train", "eval_rollout_n", t.eval_rollout_n);
  read(j, "train", "seed", t.seed);
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") +
                                e.what());
  }
  check_keys(j, "<root>", {"task", "reference", "train", "out_dir"});
  RunConfig cfg;
  if (j.contains("task")) read_task(j.at("task"), cfg.task);
  if (j.contains("reference")) read_reference(j.at("reference"), cfg.reference);
  if (j.contains("train")) read_train(j.at("train"), cfg.train);
  read(j, "<root>", "out_dir", cfg.out_dir);
  return cfg;
}

std::string run_config_to_json_text(const RunConfig& cfg) {
  json j;
  j["task"] = {{"n_questions", cfg.task.n_questions},
               {"answer_len", cfg.task.answer_len},
               {"vocab", cfg.task.vocab},
               {"hard_fraction", cfg.task.hard_fraction},
               {"seed", cfg.task.seed}};
  j["reference"] = {{"bias_strength", cfg.reference.bias_strength},
                    {"smoothing", cfg.reference.smoothing}};
  j["train"] = {
      {"algo", to_string(cfg.train.algo)},
      {"group_size", cfg.train.group_size},
      {"batch_questions", cfg.train.batch_questions},
      {"mini_batch", cfg.train.mini_batch},
      {"clip_eps", cfg.train.clip_eps},
      {"kl_coeff", cfg.train.kl_coeff},
      {"learning_rate", cfg.train.learning_rate},
      {"tau", cfg.train.tau},
      {"mask",
       {{"enabled", cfg.train.mask_enabled},
        {"ref_high", cfg.train.mask.ref_high},
        {"ref_low", cfg.train.mask.ref_low}}},
      {"use_std", cfg.train.use_std},
      {"peer_mode", cfg.train.peer_mode == PeerMode::multiplicative
                        ? "multiplicative"
                        : "exclusive"},
      {"mean_over_peers", cfg.train.mean_over_peers},
      {"logistic_exact_grad", cfg.train.logistic_exact_grad},
      {"inner_epochs", cfg.train.inner_epochs},
      {"total_steps", cfg.train.total_steps},
      {"eval_every", cfg.train.eval_every},
      {"rollout_temperature", cfg.train.rollout_temperature},
      {"eval_rollout_n", cfg.train.eval_rollout_n},
      {"seed", cfg.train.seed}};
  j["out_dir"] = cfg.out_dir;
  return j.dump(2);
}

bool operator==(const ReferenceConfig& a, const ReferenceConfig& b) {
  return a.bias_strength == b.bias_strength && a.smoothing == b.smoothing;
}
bool operator==(const TaskSpec& a, const TaskSpec& b) {
  return a.n_questions == b.n_questions && a.answer_len == b.answer_len &&
         a.vocab == b.vocab && a.hard_fraction == b.hard_fraction &&
         a.seed == b.seed;
}
bool operator==(const MaskConfig& a, const MaskConfig& b) {
  return a.ref_high == b.ref_high && a.ref_low == b.ref_low;
}
bool operator==(const TrainConfig& a, const TrainConfig& b) {
  return a.algo == b.algo && a.group_size == b.group_size &&
         a.batch_questions == b.batch_questions && a.mini_batch == b.mini_batch &&
         a.clip_eps == b.clip_eps && a.kl_coeff == b.kl_coeff &&
         a.learning_rate == b.learning_rate && a.tau == b.tau &&
         a.mask_enabled == b.mask_enabled && a.mask == b.mask &&
         a.use_std == b.use_std && a.peer_mode == b.peer_mode &&
         a.mean_over_peers == b.mean_over_peers &&
         a.logistic_exact_grad == b.logistic_exact_grad &&
         a.inner_epochs == b.inner_epochs && a.total_steps == b.total_steps &&
         a.eval_every == b.eval_every &&
         a.rollout_temperature == b.rollout_temperature &&
         a.eval_rollout_n == b.eval_rollout_n && a.seed == b.seed;
}
bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.task == b.task && a.reference == b.reference && a.train == b.train &&
         a.out_dir == b.out_dir;
}

}  // namespace capo
