// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "capo/types.hpp"

namespace capo {

/// One candidate answer with its aggregated confidence
/// C(a) = sum over supporters of exp(lpm).
struct AnswerAggregate {
  std::int64_t answer_label = 0;
  double aggregated_confidence = 0.0;
  std::size_t supporter_count = 0;
};

/// All candidate answers of a response set, ordered best-first by
/// (aggregated_confidence, supporter_count, lower label). Supporter lpm
/// values are summed in sorted order so the result is invariant under
/// permutation of the responses.
std::vector<AnswerAggregate> aggregate_answers(std::span<const Response> responses);

/// Answer-level selection: group responses by extracted answer, aggregate
/// exp(lpm) per answer, return the argmax label. Ties break by higher
/// supporter count, then by the smaller label. Errors on empty input.
std::int64_t select_answer(std::span<const Response> responses);

/// Fraction of questions whose selected answer matches the ground truth.
/// Every question must have the same number of responses and a truth entry.
double tts_accuracy(std::span<const Group> questions,
                    const std::map<std::int64_t, std::int64_t>& truth_labels);

}  // namespace capo
