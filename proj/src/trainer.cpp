// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "capo/tts.hpp"

namespace capo {

std::string to_string(Algo algo) {
  return algo == Algo::grpo ? "grpo" : "capo";
}

Algo algo_from_string(const std::string& name) {
  if (name == "grpo") return Algo::grpo;
  if (name == "capo") return Algo::capo;
  throw std::invalid_argument("unknown algo: " + name);
}

void validate(const TrainConfig& cfg) {
  if (cfg.group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (cfg.batch_questions < 1) {
    throw std::invalid_argument("batch_questions must be >= 1");
  }
  if (cfg.mini_batch < 1 || cfg.mini_batch > cfg.batch_questions) {
    throw std::invalid_argument("mini_batch must be in [1, batch_questions]");
  }
  if (!(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0)) {
    throw std::invalid_argument("clip_eps must be in (0,1)");
  }
  if (cfg.kl_coeff < 0.0) throw std::invalid_argument("kl_coeff must be >= 0");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (cfg.total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (!(cfg.rollout_temperature > 0.0)) {
    throw std::invalid_argument("rollout_temperature must be > 0");
  }
  if (cfg.eval_rollout_n < 1) {
    throw std::invalid_argument("eval_rollout_n must be >= 1");
  }
  if (cfg.inner_epochs < 1) throw std::invalid_argument("inner_epochs must be >= 1");
  if (cfg.mask_enabled) validate(cfg.mask);
}

namespace {

// Stream keys for derived rngs; keeps rollout, selection, and eval streams
// independent of each other and of the question index.
constexpr std::uint64_t kSelectStream = 0x51;
constexpr std::uint64_t kRolloutStream = 0x52;
constexpr std::uint64_t kEvalStream = 0x53;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0x9E3779B97F4A7C15ULL + 0x165667B19E3779F9ULL);
  return detail::splitmix64(s);
}

AdvantageVector advantages_for(const Group& group, const TrainConfig& cfg) {
  if (cfg.algo == Algo::grpo) {
    std::vector<int> rewards(group.responses.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      rewards[i] = group.responses[i].reward;
    }
    AdvantageVector adv = grpo_advantage(rewards, cfg.use_std);
    if (cfg.mask_enabled) {
      for (std::size_t i = 0; i < adv.size(); ++i) {
        const Response& r = group.responses[i];
        if (ref_mask(r.reward, ref_ppl(r), cfg.mask) == 0) adv[i] = 0.0;
      }
    }
    return adv;
  }
  if (cfg.mask_enabled) {
    return capo_masked_advantage(group, cfg.tau, cfg.mask, cfg.peer_mode,
                                 cfg.mean_over_peers, cfg.logistic_exact_grad);
  }
  std::vector<double> lpms(group.responses.size());
  std::vector<int> rewards(group.responses.size());
  for (std::size_t i = 0; i < lpms.size(); ++i) {
    lpms[i] = lpm(group.responses[i].logp_old);
    rewards[i] = group.responses[i].reward;
  }
  return capo_advantage(lpms, rewards, cfg.tau, cfg.mean_over_peers,
                        cfg.logistic_exact_grad);
}

}  // namespace

TrainResult train(const ToyTask& task, const PolicyParams& reference,
                  const TrainConfig& cfg) {
  validate(cfg);
  const TaskSpec& spec = task.spec;
  if (reference.n_questions != spec.n_questions ||
      reference.answer_len != spec.answer_len || reference.vocab != spec.vocab) {
    throw std::invalid_argument("reference shape does not match task");
  }
  if (cfg.batch_questions > spec.n_questions) {
    throw std::invalid_argument("batch_questions exceeds n_questions");
  }

  TrainResult result;
  result.params = reference;  // reference doubles as the initial policy
  const PolicyParams& ref = reference;

  const Rng root(cfg.seed);
  ObjectiveConfig obj_cfg{cfg.clip_eps, cfg.kl_coeff, /*token_mean=*/true};

  // Window statistics between history records.
  double window_reward_sum = 0.0;
  double window_masked_sum = 0.0;
  std::size_t window_responses = 0;

  auto record = [&](int step) {
    CalibrationReport report =
        evaluate(result.params, task, cfg.eval_rollout_n, mix(cfg.seed, kEvalStream + static_cast<std::uint64_t>(step)));
    EvalRecord rec;
    rec.step = step;
    rec.eval_accuracy = report.mean_at_k;
    rec.auc_mean = report.auc_mean ? *report.auc_mean
                                   : std::numeric_limits<double>::quiet_NaN();
    rec.policy_entropy = policy_entropy(result.params);
    if (window_responses > 0) {
      rec.train_accuracy =
          window_reward_sum / static_cast<double>(window_responses);
      rec.masked_fraction =
          window_masked_sum / static_cast<double>(window_responses);
    } else {
      rec.train_accuracy = rec.eval_accuracy;  // no rollouts yet (step 0)
      rec.masked_fraction = 0.0;
    }
    window_reward_sum = 0.0;
    window_masked_sum = 0.0;
    window_responses = 0;
    result.history.records.push_back(rec);
  };

  record(0);

  std::vector<Group> groups;
  std::vector<AdvantageVector> advantages;
  groups.reserve(static_cast<std::size_t>(cfg.batch_questions));
  advantages.reserve(static_cast<std::size_t>(cfg.batch_questions));

  for (int step = 1; step <= cfg.total_steps; ++step) {
    const PolicyParams theta_old = result.params;

    Rng select_rng = root.derive(mix(kSelectStream, static_cast<std::uint64_t>(step)));
    const std::vector<int> chosen =
        select_rng.sample_without_replacement(spec.n_questions, cfg.batch_questions);

    groups.clear();
    advantages.clear();
    for (int qi : chosen) {
      const ToyQuestion& question = task.questions[static_cast<std::size_t>(qi)];
      Rng rollout_rng = root.derive(
          mix(kRolloutStream + static_cast<std::uint64_t>(step),
              static_cast<std::uint64_t>(question.id)));
      Group group = sample_group(theta_old, question, cfg.group_size,
                                 cfg.rollout_temperature, rollout_rng, &ref);
      AdvantageVector adv = advantages_for(group, cfg);
      for (std::size_t i = 0; i < group.responses.size(); ++i) {
        window_reward_sum += group.responses[i].reward;
        if (cfg.mask_enabled) {
          const Response& r = group.responses[i];
          window_masked_sum +=
              ref_mask(r.reward, ref_ppl(r), cfg.mask) == 0 ? 1.0 : 0.0;
        }
        ++window_responses;
      }
      groups.push_back(std::move(group));
      advantages.push_back(std::move(adv));
    }

    for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
      for (std::size_t off = 0; off < groups.size();
           off += static_cast<std::size_t>(cfg.mini_batch)) {
        const std::size_t len = std::min(
            static_cast<std::size_t>(cfg.mini_batch), groups.size() - off);
        GradientVector grad = analytic_gradient(
            std::span<const Group>(groups).subspan(off, len),
            std::span<const AdvantageVector>(advantages).subspan(off, len),
            result.params, obj_cfg);
        for (std::size_t k = 0; k < grad.size(); ++k) {
          result.params.logits[k] += cfg.learning_rate * grad[k];
        }
      }
    }

    if (step % cfg.eval_every == 0 || step == cfg.total_steps) record(step);
  }
  return result;
}

CalibrationReport evaluate(const PolicyParams& params, const ToyTask& task,
                           int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("eval n must be >= 1");
  const Rng root(seed);
  CalibrationReport report;
  std::vector<std::vector<int>> rewards_per_question;
  std::vector<std::pair<double, int>> pc_items;
  std::vector<Group> eval_groups;
  std::map<std::int64_t, std::int64_t> truth_labels;

  double auc_sum = 0.0;
  for (const ToyQuestion& question : task.questions) {
    Rng rng = root.derive(static_cast<std::uint64_t>(question.id));
    // sample_group needs >= 2; sample pairwise shape then trim for n == 1.
    Group group = sample_group(params, question, std::max(n, 2), 1.0, rng);
    group.responses.resize(static_cast<std::size_t>(n));

    ScoredInstance inst;
    std::vector<int> rewards;
    for (const Response& r : group.responses) {
      const double score = lpm(r.logp_old);
      inst.scores.push_back(score);
      inst.rewards.push_back(r.reward);
      rewards.push_back(r.reward);
      pc_items.emplace_back(score, r.reward);
    }
    std::optional<double> q_auc;
    if (n >= 2) q_auc = auc(inst.scores, inst.rewards);
    report.per_question_auc[question.id] = q_auc;
    if (q_auc) {
      auc_sum += *q_auc;
      ++report.n_questions_counted;
    } else {
      ++report.n_questions_skipped;
    }
    rewards_per_question.push_back(std::move(rewards));
    truth_labels[question.id] = encode_answer(question.truth, task.spec.vocab);
    eval_groups.push_back(std::move(group));
  }
  if (report.n_questions_counted > 0) {
    report.auc_mean = auc_sum / static_cast<double>(report.n_questions_counted);
  }
  report.mean_at_k = mean_at_k(rewards_per_question);
  report.pc_curve = precision_coverage(pc_items);
  report.tts_accuracy = tts_accuracy(eval_groups, truth_labels);
  return report;
}

double policy_entropy(const PolicyParams& params) {
  std::vector<double> p(static_cast<std::size_t>(params.vocab));
  double sum = 0.0;
  for (int q = 0; q < params.n_questions; ++q) {
    for (int t = 0; t < params.answer_len; ++t) {
      softmax(params.row(q, t), p);
      double h = 0.0;
      for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
      }
      sum += h;
    }
  }
  return sum / static_cast<double>(params.n_questions * params.answer_len);
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "step,train_accuracy,eval_accuracy,auc_mean,policy_entropy,"
         "masked_fraction\n";
  char buf[256];
  for (const EvalRecord& r : history.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.train_accuracy, r.eval_accuracy, r.auc_mean,
                  r.policy_entropy, r.masked_fraction);
    out << buf;
  }
}

}  // namespace capo
