// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/types.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace capo {

namespace {

void check_logps(const std::vector<double>& logps, std::size_t n_tokens,
                 const char* which) {
  if (logps.size() != n_tokens) {
    throw std::invalid_argument(std::string(which) +
                                " length does not match tokens");
  }
  for (double v : logps) {
    if (!std::isfinite(v) || v > 0.0) {
      throw std::invalid_argument(std::string(which) +
                                  " entries must be finite and <= 0");
    }
  }
}

}  // namespace

void validate(const Response& r) {
  if (r.tokens.empty()) throw std::invalid_argument("empty response");
  check_logps(r.logp_old, r.tokens.size(), "logp_old");
  if (r.logp_ref) check_logps(*r.logp_ref, r.tokens.size(), "logp_ref");
  if (r.reward != 0 && r.reward != 1) {
    throw std::invalid_argument("reward must be 0 or 1");
  }
}

void validate(const Group& g) {
  if (g.responses.size() < 2) {
    throw std::invalid_argument("group needs at least two responses");
  }
  for (const Response& r : g.responses) {
    if (r.question_id != g.question_id) {
      throw std::invalid_argument("group mixes question ids");
    }
    validate(r);
  }
}

double lpm(std::span<const double> logps) {
  if (logps.empty()) throw std::invalid_argument("empty response");
  double sum = 0.0;
  for (double v : logps) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite log-probability");
    sum += v;
  }
  return sum / static_cast<double>(logps.size());
}

double ppl(std::span<const double> logps) { return std::exp(-lpm(logps)); }

Score response_score(const Response& r) { return Score{lpm(r.logp_old)}; }

double ref_ppl(const Response& r) {
  if (!r.logp_ref) {
    throw std::invalid_argument("reference log-probabilities required");
  }
  return ppl(*r.logp_ref);
}

std::string response_to_json_line(const Response& r) {
  nlohmann::json j;
  j["question_id"] = r.question_id;
  j["tokens"] = r.tokens;
  j["logp_old"] = r.logp_old;
  if (r.logp_ref) j["logp_ref"] = *r.logp_ref;
  j["reward"] = r.reward;
  j["answer_label"] = r.answer_label;
  return j.dump();
}

Response response_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  Response r;
  r.question_id = j.at("question_id").get<std::int64_t>();
  r.tokens = j.at("tokens").get<std::vector<int>>();
  r.logp_old = j.at("logp_old").get<std::vector<double>>();
  if (j.contains("logp_ref") && !j["logp_ref"].is_null()) {
    r.logp_ref = j["logp_ref"].get<std::vector<double>>();
  }
  r.reward = j.at("reward").get<int>();
  r.answer_label = j.at("answer_label").get<std::int64_t>();
  validate(r);
  return r;
}

void write_responses_jsonl(std::ostream& out, std::span<const Response> responses) {
  for (const Response& r : responses) out << response_to_json_line(r) << '\n';
}

std::vector<Response> read_responses_jsonl(std::istream& in) {
  std::vector<Response> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(response_from_json_line(line));
  }
  return out;
}

}  // namespace capo
