// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

// Command-line front end: train / eval / check / curve subcommands.
// All randomness is surfaced as explicit seeds; rerunning a command with the
// same inputs rewrites its outputs byte-identically.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "capo/checks.hpp"
#include "capo/config.hpp"
#include "capo/metrics.hpp"
#include "capo/objective.hpp"
#include "capo/toyenv.hpp"
#include "capo/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace capo;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

struct TrainCliOptions {
  std::string config_path;
  std::string algo;
  std::optional<bool> mask_enabled;
  std::optional<std::uint64_t> seed;
  std::optional<int> total_steps;
  std::optional<double> learning_rate;
  std::optional<double> tau;
  std::optional<std::string> peer_mode;
  std::string out_dir;
};

RunConfig resolve_train_config(const TrainCliOptions& opt) {
  RunConfig cfg;
  bool mask_from_file = false;
  if (!opt.config_path.empty()) {
    const std::string text = read_file(opt.config_path);
    cfg = run_config_from_json_text(text);
    mask_from_file = text.find("\"enabled\"") != std::string::npos;
  }
  if (!opt.algo.empty()) cfg.train.algo = algo_from_string(opt.algo);
  if (opt.seed) {
    cfg.train.seed = *opt.seed;
    cfg.task.seed = *opt.seed;
  }
  if (opt.total_steps) cfg.train.total_steps = *opt.total_steps;
  if (opt.learning_rate) cfg.train.learning_rate = *opt.learning_rate;
  if (opt.tau) cfg.train.tau = *opt.tau;
  if (opt.peer_mode) {
    cfg.train.peer_mode = *opt.peer_mode == "exclusive"
                              ? PeerMode::exclusive
                              : PeerMode::multiplicative;
  }
  if (opt.mask_enabled) {
    cfg.train.mask_enabled = *opt.mask_enabled;
  } else if (!mask_from_file) {
    // Masking is part of the capo method; the grpo baseline runs without it.
    cfg.train.mask_enabled = cfg.train.algo == Algo::capo;
  }
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  return cfg;
}

int cmd_train(const TrainCliOptions& opt) {
  const RunConfig cfg = resolve_train_config(opt);
  const ToyTask task = generate_task(cfg.task);
  const PolicyParams reference =
      pretrain_reference(task, cfg.reference.bias_strength, cfg.reference.smoothing);
  const TrainResult result = train(task, reference, cfg.train);

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "history.csv", std::ios::trunc);
    write_history_csv(out, result.history);
  }
  const CalibrationReport report =
      evaluate(result.params, task, cfg.train.eval_rollout_n,
               cfg.train.seed ^ 0xE7A1ULL);
  write_file(fs::path(cfg.out_dir) / "report.json", report_to_json(report));
  {
    std::ofstream out(fs::path(cfg.out_dir) / "pc_curve.csv", std::ios::trunc);
    write_pc_curve_csv(out, report.pc_curve);
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / "checkpoint.json", std::ios::trunc);
    save_policy(result.params, out);
  }
  write_file(fs::path(cfg.out_dir) / "config.json", run_config_to_json_text(cfg));
  {
    nlohmann::json tj;
    tj["questions"] = nlohmann::json::array();
    for (const ToyQuestion& q : task.questions) {
      tj["questions"].push_back({{"id", q.id},
                                 {"truth", q.truth},
                                 {"hard", q.hard},
                                 {"decoy", q.decoy}});
    }
    write_file(fs::path(cfg.out_dir) / "task.json", tj.dump(2));
  }

  const EvalRecord& last = result.history.records.back();
  std::printf("%s seed=%llu: final accuracy=%.4f auc_mean=%.4f -> %s\n",
              to_string(cfg.train.algo).c_str(),
              static_cast<unsigned long long>(cfg.train.seed), last.eval_accuracy,
              last.auc_mean, cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             int n, std::uint64_t seed, const std::string& out_dir) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = run_config_from_json_text(read_file(config_path));
  const ToyTask task = generate_task(cfg.task);
  std::ifstream in(checkpoint_path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + checkpoint_path);
  const PolicyParams params = load_policy(in);
  if (params.n_questions != task.spec.n_questions ||
      params.answer_len != task.spec.answer_len ||
      params.vocab != task.spec.vocab) {
    throw std::runtime_error("checkpoint shape does not match task");
  }
  const CalibrationReport report = evaluate(params, task, n, seed);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "report.json", report_to_json(report));
  {
    std::ofstream out(fs::path(out_dir) / "pc_curve.csv", std::ios::trunc);
    write_pc_curve_csv(out, report.pc_curve);
  }
  if (report.auc_mean) {
    std::printf("mean@%d=%.4f auc_mean=%.4f tts_accuracy=%.4f\n", n,
                report.mean_at_k, *report.auc_mean,
                report.tts_accuracy.value_or(0.0));
  } else {
    std::printf("mean@%d=%.4f auc_mean=undefined (no rankable questions) "
                "tts_accuracy=%.4f\n",
                n, report.mean_at_k, report.tts_accuracy.value_or(0.0));
  }
  return 0;
}

int print_check(const CheckReport& report) {
  std::printf("%-26s ran=%zu failed=%zu max_err=%.3g -> %s\n",
              report.name.c_str(), report.n_run, report.n_failed, report.max_err,
              report.ok() ? "pass" : "FAIL");
  return report.ok() ? 0 : 1;
}

int cmd_check(const std::string& suite, std::uint64_t seed, std::size_t n,
              const std::string& kind_name) {
  if (suite == "gradients") {
    return print_check(check_gradients(n == 0 ? 100 : n, seed));
  }
  if (suite == "identities") {
    int rc = 0;
    rc |= print_check(check_grpo_identity(n == 0 ? 1000 : n, seed));
    rc |= print_check(check_logistic_identity(n == 0 ? 1000 : n, seed));
    rc |= print_check(check_clip_reinforce_identity(n == 0 ? 200 : n, seed));
    return rc;
  }
  if (suite == "auc-oracle") {
    return print_check(check_auc_oracle(n == 0 ? 10000 : n, seed));
  }
  if (suite == "tts-oracle") {
    return print_check(check_tts_oracle(n == 0 ? 10000 : n, seed));
  }
  if (suite == "regret") {
    SurrogateKind kind = SurrogateKind::logistic(1.0);
    if (kind_name == "exponential") kind = SurrogateKind::exponential();
    if (kind_name == "hinge") kind = SurrogateKind::hinge();
    if (kind_name == "squared") kind = SurrogateKind::squared();
    const RegretBoundReport r = regret_bound_check(n == 0 ? 1000 : n, kind, seed);
    std::printf("regret(%s)             ran=%zu violations=%zu max_slack=%.4f -> %s\n",
                kind_name.empty() ? "logistic" : kind_name.c_str(), r.n_instances,
                r.n_violations, r.max_slack_ratio,
                r.n_violations == 0 ? "pass" : "FAIL");
    return r.n_violations == 0 ? 0 : 1;
  }
  if (suite == "scaling") {
    const ScalingCheckReport r =
        scaling_counterexample_check(n == 0 ? 100 : n, seed);
    const bool ok = r.auc_mismatches == 0 && r.linear_scale_failures == 0 &&
                    r.logistic_negative == 0;
    std::printf("scaling                    trials=%zu auc_mismatch=%zu "
                "linear_fail=%zu logistic_neg=%zu -> %s\n",
                r.n_trials, r.auc_mismatches, r.linear_scale_failures,
                r.logistic_negative, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  if (suite == "ustat") {
    Rng rng(seed);
    std::vector<ScoredInstance> groups;
    const std::size_t n_groups = n == 0 ? 10000 : n;
    // Group members must be i.i.d. draws from one mixture distribution.
    for (std::size_t i = 0; i < n_groups; ++i) {
      ScoredInstance inst;
      for (int k = 0; k < 8; ++k) {
        const int reward = static_cast<int>(rng.uniform_int(0, 1));
        inst.rewards.push_back(reward);
        inst.scores.push_back(reward == 1 ? rng.normal(-1.0, 0.5)
                                          : rng.normal(-2.0, 0.7));
      }
      groups.push_back(std::move(inst));
    }
    const UStatReport r = u_statistic_check(
        groups, [](double la, int ra, double lb, int rb) {
          return (ra - rb) * (la - lb);
        });
    const bool ok = std::abs(r.z_score) <= 3.0;
    std::printf("ustat                      groups=%zu group_mean=%.5f "
                "pair_mean=%.5f z=%.3f -> %s\n",
                r.n_groups, r.group_mean, r.pair_mean, r.z_score,
                ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  std::fprintf(stderr, "unknown check suite: %s\n", suite.c_str());
  return 2;
}

int cmd_curve(double tau, double gap_min, double gap_max, std::size_t steps,
              const std::string& out_path) {
  const auto curve = advantage_curve(gap_min, gap_max, steps, tau);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + out_path);
  out << "gap,advantage_magnitude\n";
  char buf[64];
  for (const CurvePoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.gap, p.magnitude);
    out << buf;
  }
  std::printf("wrote %zu points -> %s\n", curve.size(), out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capo: calibration-aware policy optimization on a toy "
               "verifiable-reward task"};
  app.require_subcommand(1);

  TrainCliOptions train_opt;
  bool mask_flag = false;
  CLI::App* train_cmd = app.add_subcommand("train", "train a policy");
  train_cmd->add_option("--config", train_opt.config_path, "JSON run config");
  train_cmd->add_option("--algo", train_opt.algo, "grpo or capo")
      ->check(CLI::IsMember({"grpo", "capo"}));
  auto* mask_opt =
      train_cmd->add_option("--mask-enabled", mask_flag, "override masking");
  train_cmd->add_option("--seed", train_opt.seed, "task + train seed");
  train_cmd->add_option("--steps", train_opt.total_steps, "total train steps");
  train_cmd->add_option("--lr", train_opt.learning_rate, "learning rate");
  train_cmd->add_option("--tau", train_opt.tau, "logistic temperature");
  train_cmd->add_option("--peer-mode", train_opt.peer_mode,
                        "multiplicative or exclusive")
      ->check(CLI::IsMember({"multiplicative", "exclusive"}));
  train_cmd->add_option("--out", train_opt.out_dir, "output directory");

  std::string eval_checkpoint, eval_config, eval_out = "runs/eval";
  int eval_n = 16;
  std::uint64_t eval_seed = 0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "policy JSON")->required();
  eval_cmd->add_option("--config", eval_config, "JSON run config (task spec)");
  eval_cmd->add_option("--n", eval_n, "responses per question");
  eval_cmd->add_option("--seed", eval_seed, "eval seed");
  eval_cmd->add_option("--out", eval_out, "output directory");

  std::string check_suite, check_kind;
  std::uint64_t check_seed = 0;
  std::size_t check_n = 0;
  CLI::App* check_cmd = app.add_subcommand("check", "run a property suite");
  check_cmd
      ->add_option("suite", check_suite,
                   "gradients|identities|regret|scaling|ustat|auc-oracle|"
                   "tts-oracle")
      ->required();
  check_cmd->add_option("--seed", check_seed, "seed");
  check_cmd->add_option("--n", check_n, "instance count (0 = suite default)");
  check_cmd->add_option("--kind", check_kind,
                        "surrogate kind for the regret suite")
      ->check(CLI::IsMember({"logistic", "exponential", "hinge", "squared"}));

  double curve_tau = 0.6, curve_min = -4.0, curve_max = 8.0;
  std::size_t curve_steps = 121;
  std::string curve_out = "advantage_curve.csv";
  CLI::App* curve_cmd =
      app.add_subcommand("curve", "write the pair-advantage gap curve");
  curve_cmd->add_option("--tau", curve_tau, "logistic temperature");
  curve_cmd->add_option("--gap-min", curve_min, "grid start");
  curve_cmd->add_option("--gap-max", curve_max, "grid end");
  curve_cmd->add_option("--steps", curve_steps, "grid points");
  curve_cmd->add_option("--out", curve_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      if (mask_opt->count() > 0) train_opt.mask_enabled = mask_flag;
      return cmd_train(train_opt);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_checkpoint, eval_config, eval_n, eval_seed, eval_out);
    }
    if (check_cmd->parsed()) {
      return cmd_check(check_suite, check_seed, check_n, check_kind);
    }
    if (curve_cmd->parsed()) {
      return cmd_curve(curve_tau, curve_min, curve_max, curve_steps, curve_out);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
