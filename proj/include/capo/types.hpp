// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace capo {

/// One sampled answer for a question: token ids plus per-token
/// log-probabilities under the behavior policy (and optionally the reference
/// policy), the binary verifier reward, and the extracted-answer label used
/// for answer-level aggregation.
struct Response {
  std::int64_t question_id = 0;
  std::vector<int> tokens;
  std::vector<double> logp_old;
  std::optional<std::vector<double>> logp_ref;
  int reward = 0;  // 0 or 1
  std::int64_t answer_label = 0;
};

/// G responses to one question; the unit of advantage estimation.
struct Group {
  std::int64_t question_id = 0;
  std::vector<Response> responses;
};

/// Confidence score, higher = more confident. The default scorer is
/// f = lpm (mean token log-probability), a strictly decreasing transform of
/// perplexity, so ranking by Score is ranking by -log(PPL).
struct Score {
  double value = 0.0;
};

/// Throws std::invalid_argument when an invariant is violated:
/// non-empty tokens, log-prob vectors aligned with tokens, finite entries
/// <= 0, reward in {0,1}.
void validate(const Response& r);

/// Throws when the group has fewer than two responses, mixes question ids,
/// or contains an invalid response.
void validate(const Group& g);

/// Mean of per-token log-probabilities. Errors on an empty sequence.
double lpm(std::span<const double> logps);

/// Perplexity: exp(-lpm). >= 1 whenever all log-probabilities are <= 0.
double ppl(std::span<const double> logps);

/// Score of a response under the policy it was sampled from.
Score response_score(const Response& r);

/// Reference-policy perplexity of a response. Errors when logp_ref is absent.
double ref_ppl(const Response& r);

// Line-delimited JSON interchange: one response object per line with keys
// {question_id, tokens, logp_old, logp_ref?, reward, answer_label}.
std::string response_to_json_line(const Response& r);
Response response_from_json_line(const std::string& line);
void write_responses_jsonl(std::ostream& out, std::span<const Response> responses);
std::vector<Response> read_responses_jsonl(std::istream& in);

}  // namespace capo
