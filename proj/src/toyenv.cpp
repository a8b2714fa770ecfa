// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/toyenv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace capo {

namespace {

// Hard-question construction: the decoy and the truth both get a bias scaled
// by these per-tier fractions, so hard questions span a range of initial
// misranking gaps (and of how often sampling reaches the truth at all).
// At the default bias/smoothing, the first two tiers are shallow
// (p_decoy, p_truth) ~ (0.51, 0.42) per position and the rest form a
// depth spectrum from (0.72, 0.20) down to (0.85, 0.11), staggering the
// step at which group sampling starts hitting the truth.
struct HardTier {
  double decoy_frac;
  double truth_frac;
};
constexpr HardTier kHardTiers[] = {
    {1.5374, 1.4730},
    {1.5395, 1.4701},
    {1.6257, 1.5525},
    {1.5416, 1.4672},
    {1.6846, 1.6069},
    {1.5438, 1.4643},
    {1.2104, 1.0158},
    {1.2140, 1.0074},
};
constexpr std::size_t kNumHardTiers = sizeof(kHardTiers) / sizeof(kHardTiers[0]);

}  // namespace

PolicyParams PolicyParams::zeros(int n_questions, int answer_len, int vocab) {
  PolicyParams p;
  p.n_questions = n_questions;
  p.answer_len = answer_len;
  p.vocab = vocab;
  p.logits.assign(static_cast<std::size_t>(n_questions) *
                      static_cast<std::size_t>(answer_len) *
                      static_cast<std::size_t>(vocab),
                  0.0);
  return p;
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - m);
  const double log_z = m + std::log(sum);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
}

void softmax(std::span<const double> logits, std::span<double> out) {
  log_softmax(logits, out);
  for (double& v : out) v = std::exp(v);
}

ToyTask generate_task(const TaskSpec& spec) {
  if (spec.vocab < 2) throw std::invalid_argument("vocab must be >= 2");
  if (spec.answer_len < 1) throw std::invalid_argument("answer_len must be >= 1");
  if (spec.n_questions < 1) throw std::invalid_argument("n_questions must be >= 1");
  if (!(spec.hard_fraction >= 0.0 && spec.hard_fraction <= 1.0)) {
    throw std::invalid_argument("hard_fraction must be in [0,1]");
  }
  if (spec.answer_len * std::log(static_cast<double>(spec.vocab)) >
      62.0 * std::log(2.0)) {
    throw std::invalid_argument("answer space too large for label encoding");
  }

  Rng rng(spec.seed);
  ToyTask task;
  task.spec = spec;
  task.questions.resize(static_cast<std::size_t>(spec.n_questions));
  for (int q = 0; q < spec.n_questions; ++q) {
    ToyQuestion& question = task.questions[static_cast<std::size_t>(q)];
    question.id = q;
    question.truth.resize(static_cast<std::size_t>(spec.answer_len));
    question.decoy.resize(static_cast<std::size_t>(spec.answer_len));
    for (int t = 0; t < spec.answer_len; ++t) {
      const int truth_tok = static_cast<int>(rng.uniform_int(0, spec.vocab - 1));
      // Decoy differs from the truth in every position.
      int decoy_tok = static_cast<int>(rng.uniform_int(0, spec.vocab - 2));
      if (decoy_tok >= truth_tok) ++decoy_tok;
      question.truth[static_cast<std::size_t>(t)] = truth_tok;
      question.decoy[static_cast<std::size_t>(t)] = decoy_tok;
    }
  }
  const int n_hard = static_cast<int>(
      std::llround(spec.hard_fraction * static_cast<double>(spec.n_questions)));
  std::vector<int> order = rng.sample_without_replacement(spec.n_questions,
                                                          spec.n_questions);
  for (int i = 0; i < n_hard; ++i) {
    task.questions[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]
        .hard = true;
  }
  return task;
}

PolicyParams pretrain_reference(const ToyTask& task, double bias_strength,
                                double smoothing) {
  if (bias_strength < 0.0) throw std::invalid_argument("bias_strength must be >= 0");
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be > 0");
  const TaskSpec& spec = task.spec;
  PolicyParams params =
      PolicyParams::zeros(spec.n_questions, spec.answer_len, spec.vocab);
  const double uniform = 1.0 / static_cast<double>(spec.vocab);

  std::size_t hard_seen = 0;
  std::vector<double> base(static_cast<std::size_t>(spec.vocab));
  std::vector<double> probs(static_cast<std::size_t>(spec.vocab));
  for (int q = 0; q < spec.n_questions; ++q) {
    const ToyQuestion& question = task.questions[static_cast<std::size_t>(q)];
    double truth_bias = bias_strength;
    double decoy_bias = 0.0;
    if (question.hard) {
      const HardTier& tier = kHardTiers[hard_seen % kNumHardTiers];
      ++hard_seen;
      truth_bias = bias_strength * tier.truth_frac;
      decoy_bias = bias_strength * tier.decoy_frac;
    }
    for (int t = 0; t < spec.answer_len; ++t) {
      std::fill(base.begin(), base.end(), 0.0);
      base[static_cast<std::size_t>(question.truth[static_cast<std::size_t>(t)])] =
          truth_bias;
      if (question.hard) {
        base[static_cast<std::size_t>(
            question.decoy[static_cast<std::size_t>(t)])] = decoy_bias;
      }
      softmax(base, probs);
      auto row = params.row(q, t);
      for (int k = 0; k < spec.vocab; ++k) {
        const double p =
            (probs[static_cast<std::size_t>(k)] + smoothing * uniform) /
            (1.0 + smoothing);
        row[static_cast<std::size_t>(k)] = std::log(p);
      }
    }
  }
  return params;
}

Group sample_group(const PolicyParams& params, const ToyQuestion& question,
                   int group_size, double temperature, Rng& rng,
                   const PolicyParams* ref) {
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (ref != nullptr && !params.same_shape(*ref)) {
    throw std::invalid_argument("reference shape mismatch");
  }
  const int L = params.answer_len;
  const int V = params.vocab;
  const int q = static_cast<int>(question.id);

  // Per-position sampling distribution at the rollout temperature.
  std::vector<double> scaled(static_cast<std::size_t>(V));
  std::vector<double> logp(static_cast<std::size_t>(L) * static_cast<std::size_t>(V));
  std::vector<double> p(static_cast<std::size_t>(L) * static_cast<std::size_t>(V));
  for (int t = 0; t < L; ++t) {
    auto row = params.row(q, t);
    for (int k = 0; k < V; ++k) {
      scaled[static_cast<std::size_t>(k)] =
          row[static_cast<std::size_t>(k)] / temperature;
    }
    auto lp = std::span<double>(logp).subspan(
        static_cast<std::size_t>(t) * static_cast<std::size_t>(V),
        static_cast<std::size_t>(V));
    log_softmax(scaled, lp);
    for (int k = 0; k < V; ++k) {
      p[static_cast<std::size_t>(t) * static_cast<std::size_t>(V) +
        static_cast<std::size_t>(k)] = std::exp(lp[static_cast<std::size_t>(k)]);
    }
  }
  std::vector<double> ref_logp;
  if (ref != nullptr) {
    ref_logp.resize(static_cast<std::size_t>(L) * static_cast<std::size_t>(V));
    for (int t = 0; t < L; ++t) {
      auto lp = std::span<double>(ref_logp).subspan(
          static_cast<std::size_t>(t) * static_cast<std::size_t>(V),
          static_cast<std::size_t>(V));
      log_softmax(ref->row(q, t), lp);
    }
  }

  Group group;
  group.question_id = question.id;
  group.responses.resize(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    Response& r = group.responses[static_cast<std::size_t>(i)];
    r.question_id = question.id;
    r.tokens.resize(static_cast<std::size_t>(L));
    r.logp_old.resize(static_cast<std::size_t>(L));
    if (ref != nullptr) r.logp_ref.emplace(static_cast<std::size_t>(L));
    for (int t = 0; t < L; ++t) {
      auto pt = std::span<const double>(p).subspan(
          static_cast<std::size_t>(t) * static_cast<std::size_t>(V),
          static_cast<std::size_t>(V));
      const int tok = rng.categorical(pt);
      r.tokens[static_cast<std::size_t>(t)] = tok;
      r.logp_old[static_cast<std::size_t>(t)] =
          logp[static_cast<std::size_t>(t) * static_cast<std::size_t>(V) +
               static_cast<std::size_t>(tok)];
      if (ref != nullptr) {
        (*r.logp_ref)[static_cast<std::size_t>(t)] =
            ref_logp[static_cast<std::size_t>(t) * static_cast<std::size_t>(V) +
                     static_cast<std::size_t>(tok)];
      }
    }
    r.reward = verify(question, r.tokens);
    r.answer_label = encode_answer(r.tokens, V);
  }
  return group;
}

int verify(const ToyQuestion& question, std::span<const int> tokens) {
  if (tokens.size() != question.truth.size()) {
    throw std::invalid_argument("answer length mismatch");
  }
  return std::equal(tokens.begin(), tokens.end(), question.truth.begin()) ? 1 : 0;
}

ScoredInstance synth_group(const NormalSpec& lpm_pos_dist,
                           const NormalSpec& lpm_neg_dist, std::size_t n_pos,
                           std::size_t n_neg, Rng& rng) {
  if (n_pos + n_neg < 2) {
    throw std::invalid_argument("group needs at least two responses");
  }
  ScoredInstance inst;
  inst.scores.reserve(n_pos + n_neg);
  inst.rewards.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos; ++i) {
    inst.scores.push_back(rng.normal(lpm_pos_dist.mean, lpm_pos_dist.sd));
    inst.rewards.push_back(1);
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    inst.scores.push_back(rng.normal(lpm_neg_dist.mean, lpm_neg_dist.sd));
    inst.rewards.push_back(0);
  }
  return inst;
}

std::int64_t encode_answer(std::span<const int> tokens, int vocab) {
  std::int64_t label = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    label = label * vocab + tokens[t];
  }
  return label;
}

void save_policy(const PolicyParams& params, std::ostream& out) {
  nlohmann::json j;
  j["n_questions"] = params.n_questions;
  j["answer_len"] = params.answer_len;
  j["vocab"] = params.vocab;
  j["logits"] = params.logits;
  out << j.dump() << '\n';
}

PolicyParams load_policy(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  PolicyParams params;
  params.n_questions = j.at("n_questions").get<int>();
  params.answer_len = j.at("answer_len").get<int>();
  params.vocab = j.at("vocab").get<int>();
  params.logits = j.at("logits").get<std::vector<double>>();
  const std::size_t expect = static_cast<std::size_t>(params.n_questions) *
                             static_cast<std::size_t>(params.answer_len) *
                             static_cast<std::size_t>(params.vocab);
  if (params.logits.size() != expect) {
    throw std::invalid_argument("checkpoint logits length mismatch");
  }
  return params;
}

}  // namespace capo
