// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/tts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capo {

std::vector<AnswerAggregate> aggregate_answers(std::span<const Response> responses) {
  if (responses.empty()) throw std::invalid_argument("no responses");
  std::map<std::int64_t, std::vector<double>> supporters;
  for (const Response& r : responses) {
    supporters[r.answer_label].push_back(lpm(r.logp_old));
  }
  std::vector<AnswerAggregate> out;
  out.reserve(supporters.size());
  for (auto& [label, lpms] : supporters) {
    // Canonical summation order: permutation invariance of the confidence.
    std::sort(lpms.begin(), lpms.end());
    double c = 0.0;
    for (double v : lpms) c += std::exp(v);
    out.push_back(AnswerAggregate{label, c, lpms.size()});
  }
  std::sort(out.begin(), out.end(),
            [](const AnswerAggregate& a, const AnswerAggregate& b) {
              if (a.aggregated_confidence != b.aggregated_confidence) {
                return a.aggregated_confidence > b.aggregated_confidence;
              }
              if (a.supporter_count != b.supporter_count) {
                return a.supporter_count > b.supporter_count;
              }
              return a.answer_label < b.answer_label;
            });
  return out;
}

std::int64_t select_answer(std::span<const Response> responses) {
  return aggregate_answers(responses).front().answer_label;
}

double tts_accuracy(std::span<const Group> questions,
                    const std::map<std::int64_t, std::int64_t>& truth_labels) {
  if (questions.empty()) throw std::invalid_argument("no questions");
  const std::size_t n = questions.front().responses.size();
  std::size_t correct = 0;
  for (const Group& g : questions) {
    if (g.responses.size() != n) {
      throw std::invalid_argument("ragged response counts");
    }
    auto it = truth_labels.find(g.question_id);
    if (it == truth_labels.end()) {
      throw std::invalid_argument("missing ground truth");
    }
    if (select_answer(g.responses) == it->second) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(questions.size());
}

}  // namespace capo
