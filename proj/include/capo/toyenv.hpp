// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capo/rng.hpp"
#include "capo/surrogate.hpp"
#include "capo/types.hpp"

namespace capo {

/// Synthetic verifiable-reward task: n_questions questions, each with one
/// correct answer sequence of answer_len tokens over a vocab-sized alphabet.
/// A hard_fraction of questions carries a decoy wrong answer the base policy
/// is biased toward.
struct TaskSpec {
  int n_questions = 64;
  int answer_len = 6;
  int vocab = 10;
  double hard_fraction = 0.25;
  std::uint64_t seed = 0;
};

struct ToyQuestion {
  std::int64_t id = 0;
  std::vector<int> truth;
  bool hard = false;
  std::vector<int> decoy;  // differs from truth in every position when hard
};

struct ToyTask {
  TaskSpec spec;
  std::vector<ToyQuestion> questions;
};

/// Tabular position-factored policy: softmax over the token axis of
/// logits[question][position][token] defines pi(y_t | q, t).
struct PolicyParams {
  int n_questions = 0;
  int answer_len = 0;
  int vocab = 0;
  std::vector<double> logits;  // question-major, then position, then token

  static PolicyParams zeros(int n_questions, int answer_len, int vocab);

  std::size_t size() const { return logits.size(); }
  std::size_t index(int q, int pos, int tok) const {
    return (static_cast<std::size_t>(q) * static_cast<std::size_t>(answer_len) +
            static_cast<std::size_t>(pos)) *
               static_cast<std::size_t>(vocab) +
           static_cast<std::size_t>(tok);
  }
  std::span<const double> row(int q, int pos) const {
    return std::span<const double>(logits).subspan(index(q, pos, 0),
                                                   static_cast<std::size_t>(vocab));
  }
  std::span<double> row(int q, int pos) {
    return std::span<double>(logits).subspan(index(q, pos, 0),
                                             static_cast<std::size_t>(vocab));
  }
  bool same_shape(const PolicyParams& other) const {
    return n_questions == other.n_questions && answer_len == other.answer_len &&
           vocab == other.vocab;
  }
};

/// Numerically stable log-softmax / softmax over one logit row.
void log_softmax(std::span<const double> logits, std::span<double> out);
void softmax(std::span<const double> logits, std::span<double> out);

/// Deterministic task per seed. Errors when vocab < 2, answer_len < 1 or
/// n_questions < 1.
ToyTask generate_task(const TaskSpec& spec);

/// Base policy construction. Easy questions favor the correct answer with a
/// moderate margin; hard questions favor their decoy (with the truth at a
/// lower, tiered secondary level so it stays reachable by sampling).
/// smoothing mixes in the uniform distribution, bounding every probability
/// away from zero; bias_strength = 0 gives the uniform policy.
PolicyParams pretrain_reference(const ToyTask& task, double bias_strength,
                                double smoothing);

/// G ancestral samples from the position-factored policy at the given
/// temperature. Records per-token log-probabilities under the sampling
/// distribution, and under `ref` (temperature 1) when provided; rewards come
/// from verify.
Group sample_group(const PolicyParams& params, const ToyQuestion& question,
                   int group_size, double temperature, Rng& rng,
                   const PolicyParams* ref = nullptr);

/// 1 iff tokens equal the ground-truth answer. Errors on length mismatch.
int verify(const ToyQuestion& question, std::span<const int> tokens);

/// Normal distribution parameters for synthetic lpm draws.
struct NormalSpec {
  double mean = 0.0;
  double sd = 1.0;
};

/// Controlled fixture: n_pos scores from the positive-lpm distribution and
/// n_neg from the negative one, with labels attached. No policy involved.
ScoredInstance synth_group(const NormalSpec& lpm_pos_dist,
                           const NormalSpec& lpm_neg_dist, std::size_t n_pos,
                           std::size_t n_neg, Rng& rng);

/// Answer label encoding a token sequence; bijective for fixed length.
std::int64_t encode_answer(std::span<const int> tokens, int vocab);

// Checkpoint serialization (JSON; logits flat in index order:
// question-major, then position, then token).
void save_policy(const PolicyParams& params, std::ostream& out);
PolicyParams load_policy(std::istream& in);

}  // namespace capo
