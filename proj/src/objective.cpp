// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "capo/surrogate.hpp"

namespace capo {

void validate(const ObjectiveConfig& cfg) {
  if (!(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0)) {
    throw std::invalid_argument("clip_eps must be in (0,1)");
  }
  if (cfg.kl_coeff < 0.0) throw std::invalid_argument("kl_coeff must be >= 0");
}

double token_ratio(double logp_new, double logp_old) {
  return std::exp(logp_new - logp_old);
}

double clipped_term(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * adv, clipped * adv);
}

double kl_k3(double logp_ref, double logp_theta) {
  const double log_r = logp_ref - logp_theta;
  return std::exp(log_r) - log_r - 1.0;
}

namespace {

void check_alignment(std::span<const Group> groups,
                     std::span<const AdvantageVector> advantages,
                     const PolicyParams& params) {
  if (groups.size() != advantages.size()) {
    throw std::invalid_argument("groups/advantages count mismatch");
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].responses.size() != advantages[g].size()) {
      throw std::invalid_argument("advantage vector length mismatch");
    }
    if (groups[g].question_id < 0 || groups[g].question_id >= params.n_questions) {
      throw std::invalid_argument("question id out of range for params");
    }
    for (const Response& r : groups[g].responses) {
      if (static_cast<int>(r.tokens.size()) != params.answer_len) {
        throw std::invalid_argument("response length does not match params");
      }
    }
  }
}

// Per-position log-softmax rows for one question, cached as a flat block.
struct QuestionLogProbs {
  std::vector<double> logp;  // answer_len x vocab
  std::vector<double> p;     // softmax probabilities

  QuestionLogProbs(const PolicyParams& params, int q) {
    const std::size_t lv = static_cast<std::size_t>(params.answer_len) *
                           static_cast<std::size_t>(params.vocab);
    logp.resize(lv);
    p.resize(lv);
    for (int t = 0; t < params.answer_len; ++t) {
      auto lp = std::span<double>(logp).subspan(
          static_cast<std::size_t>(t) * static_cast<std::size_t>(params.vocab),
          static_cast<std::size_t>(params.vocab));
      log_softmax(params.row(q, t), lp);
      for (int k = 0; k < params.vocab; ++k) {
        p[static_cast<std::size_t>(t) * static_cast<std::size_t>(params.vocab) +
          static_cast<std::size_t>(k)] =
            std::exp(lp[static_cast<std::size_t>(k)]);
      }
    }
  }

  double at(int t, int tok, int vocab) const {
    return logp[static_cast<std::size_t>(t) * static_cast<std::size_t>(vocab) +
                static_cast<std::size_t>(tok)];
  }
};

// Adds coef * d(logp(tok at q,t))/d(logits row) to grad.
void add_logp_grad(GradientVector& grad, const PolicyParams& params,
                   const QuestionLogProbs& cache, int q, int t, int tok,
                   double coef) {
  const int V = params.vocab;
  const std::size_t base = params.index(q, t, 0);
  const std::size_t row = static_cast<std::size_t>(t) * static_cast<std::size_t>(V);
  for (int k = 0; k < V; ++k) {
    grad[base + static_cast<std::size_t>(k)] -=
        coef * cache.p[row + static_cast<std::size_t>(k)];
  }
  grad[base + static_cast<std::size_t>(tok)] += coef;
}

}  // namespace

double batch_objective(std::span<const Group> groups,
                       std::span<const AdvantageVector> advantages,
                       const PolicyParams& params, const ObjectiveConfig& cfg) {
  validate(cfg);
  check_alignment(groups, advantages, params);
  if (groups.empty()) throw std::invalid_argument("no groups");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    const int q = static_cast<int>(group.question_id);
    QuestionLogProbs cache(params, q);
    double group_sum = 0.0;
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const Response& r = group.responses[i];
      const double adv = advantages[g][i];
      double resp_sum = 0.0;
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        const double logp_new =
            cache.at(static_cast<int>(t), r.tokens[t], params.vocab);
        const double ratio = token_ratio(logp_new, r.logp_old[t]);
        double term = clipped_term(ratio, adv, cfg.clip_eps);
        if (cfg.kl_coeff != 0.0) {
          if (!r.logp_ref) {
            throw std::invalid_argument("reference log-probabilities required");
          }
          term -= cfg.kl_coeff * kl_k3((*r.logp_ref)[t], logp_new);
        }
        resp_sum += term;
      }
      if (cfg.token_mean) resp_sum /= static_cast<double>(r.tokens.size());
      group_sum += resp_sum;
    }
    total += group_sum / static_cast<double>(group.responses.size());
  }
  return total / static_cast<double>(groups.size());
}

GradientVector analytic_gradient(std::span<const Group> groups,
                                 std::span<const AdvantageVector> advantages,
                                 const PolicyParams& params,
                                 const ObjectiveConfig& cfg) {
  validate(cfg);
  check_alignment(groups, advantages, params);
  if (groups.empty()) throw std::invalid_argument("no groups");
  GradientVector grad(params.size(), 0.0);
  const double group_w = 1.0 / static_cast<double>(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    const int q = static_cast<int>(group.question_id);
    QuestionLogProbs cache(params, q);
    const double resp_w =
        group_w / static_cast<double>(group.responses.size());
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const Response& r = group.responses[i];
      const double adv = advantages[g][i];
      const double token_w =
          cfg.token_mean ? resp_w / static_cast<double>(r.tokens.size()) : resp_w;
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        const double logp_new =
            cache.at(static_cast<int>(t), r.tokens[t], params.vocab);
        const double ratio = token_ratio(logp_new, r.logp_old[t]);
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps,
                                          1.0 + cfg.clip_eps);
        // Unclipped branch active (ties included) iff r*A <= clip(r)*A.
        double coef = 0.0;
        if (ratio * adv <= clipped * adv) coef = adv * ratio;
        if (cfg.kl_coeff != 0.0) {
          if (!r.logp_ref) {
            throw std::invalid_argument("reference log-probabilities required");
          }
          const double r_tilde = std::exp((*r.logp_ref)[t] - logp_new);
          coef += -cfg.kl_coeff * (1.0 - r_tilde);
        }
        if (coef != 0.0) {
          add_logp_grad(grad, params, cache, q, static_cast<int>(t), r.tokens[t],
                        coef * token_w);
        }
      }
    }
  }
  return grad;
}

GradientVector reinforce_gradient(std::span<const Group> groups,
                                  std::span<const AdvantageVector> advantages,
                                  const PolicyParams& params) {
  check_alignment(groups, advantages, params);
  if (groups.empty()) throw std::invalid_argument("no groups");
  GradientVector grad(params.size(), 0.0);
  const double group_w = 1.0 / static_cast<double>(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    const int q = static_cast<int>(group.question_id);
    QuestionLogProbs cache(params, q);
    const double resp_w = group_w / static_cast<double>(group.responses.size());
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const Response& r = group.responses[i];
      const double adv = advantages[g][i];
      if (adv == 0.0) continue;
      const double token_w = resp_w * adv / static_cast<double>(r.tokens.size());
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        add_logp_grad(grad, params, cache, q, static_cast<int>(t), r.tokens[t],
                      token_w);
      }
    }
  }
  return grad;
}

namespace {

// grad of lpm for one response, dense over the question's logits block.
std::vector<double> lpm_gradient_block(const Response& r,
                                       const PolicyParams& params,
                                       const QuestionLogProbs& cache) {
  const int V = params.vocab;
  const int L = params.answer_len;
  std::vector<double> block(static_cast<std::size_t>(L) *
                                static_cast<std::size_t>(V),
                            0.0);
  const double w = 1.0 / static_cast<double>(r.tokens.size());
  for (std::size_t t = 0; t < r.tokens.size(); ++t) {
    const std::size_t row = t * static_cast<std::size_t>(V);
    for (int k = 0; k < V; ++k) {
      block[row + static_cast<std::size_t>(k)] -=
          w * cache.p[row + static_cast<std::size_t>(k)];
    }
    block[row + static_cast<std::size_t>(r.tokens[t])] += w;
  }
  return block;
}

double response_lpm(const Response& r, const PolicyParams& params,
                    const QuestionLogProbs& cache) {
  double sum = 0.0;
  for (std::size_t t = 0; t < r.tokens.size(); ++t) {
    sum += cache.at(static_cast<int>(t), r.tokens[t], params.vocab);
  }
  return sum / static_cast<double>(r.tokens.size());
}

}  // namespace

GradientVector pairwise_grpo_gradient(const Group& group,
                                      const PolicyParams& params) {
  const int q = static_cast<int>(group.question_id);
  QuestionLogProbs cache(params, q);
  const std::size_t n = group.responses.size();
  std::vector<std::vector<double>> glpm(n);
  for (std::size_t i = 0; i < n; ++i) {
    glpm[i] = lpm_gradient_block(group.responses[i], params, cache);
  }
  GradientVector grad(params.size(), 0.0);
  const std::size_t base = params.index(q, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int w = group.responses[i].reward - group.responses[j].reward;
      if (w == 0) continue;
      for (std::size_t k = 0; k < glpm[i].size(); ++k) {
        grad[base + k] += w * (glpm[i][k] - glpm[j][k]);
      }
    }
  }
  return grad;
}

GradientVector pairwise_logistic_gradient(const Group& group,
                                          const PolicyParams& params,
                                          double tau) {
  const int q = static_cast<int>(group.question_id);
  QuestionLogProbs cache(params, q);
  const std::size_t n = group.responses.size();
  const SurrogateKind kind = SurrogateKind::logistic(tau);
  std::vector<std::vector<double>> glpm(n);
  std::vector<double> lpms(n);
  for (std::size_t i = 0; i < n; ++i) {
    glpm[i] = lpm_gradient_block(group.responses[i], params, cache);
    lpms[i] = response_lpm(group.responses[i], params, cache);
  }
  GradientVector grad(params.size(), 0.0);
  const std::size_t base = params.index(q, 0, 0);
  const double inv_g = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (group.responses[i].reward != 1) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (group.responses[j].reward != 0) continue;
      const double w = -inv_g * phi_prime(kind, lpms[i] - lpms[j]);
      for (std::size_t k = 0; k < glpm[i].size(); ++k) {
        grad[base + k] += w * (glpm[i][k] - glpm[j][k]);
      }
    }
  }
  return grad;
}

UStatReport u_statistic_check(std::span<const ScoredInstance> groups,
                              const PairKernel& kernel) {
  if (groups.size() < 1000) throw std::invalid_argument("too few samples");
  UStatReport report;

  // First half: order-2 U-statistic per group, averaged across groups.
  const std::size_t half = groups.size() / 2;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t g = 0; g < half; ++g) {
    const ScoredInstance& inst = groups[g];
    const std::size_t n = inst.scores.size();
    if (n < 2) throw std::invalid_argument("group needs at least two responses");
    double u = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        u += kernel(inst.scores[i], inst.rewards[i], inst.scores[j],
                    inst.rewards[j]);
        ++count;
      }
    }
    u /= static_cast<double>(count);
    sum += u;
    sum_sq += u * u;
  }
  report.n_groups = half;
  report.group_mean = sum / static_cast<double>(half);
  const double var_g =
      std::max(0.0, sum_sq / static_cast<double>(half) -
                        report.group_mean * report.group_mean);
  report.group_se = std::sqrt(var_g / static_cast<double>(half));

  // Second half: disjoint within-group pairs are independent draws of the
  // kernel, giving an unbiased Monte-Carlo estimate of the same expectation.
  double psum = 0.0, psum_sq = 0.0;
  std::size_t n_pairs = 0;
  for (std::size_t g = half; g < groups.size(); ++g) {
    const ScoredInstance& inst = groups[g];
    for (std::size_t i = 0; i + 1 < inst.scores.size(); i += 2) {
      const double h = kernel(inst.scores[i], inst.rewards[i],
                              inst.scores[i + 1], inst.rewards[i + 1]);
      psum += h;
      psum_sq += h * h;
      ++n_pairs;
    }
  }
  if (n_pairs == 0) throw std::invalid_argument("too few samples");
  report.n_pairs = n_pairs;
  report.pair_mean = psum / static_cast<double>(n_pairs);
  const double var_p =
      std::max(0.0, psum_sq / static_cast<double>(n_pairs) -
                        report.pair_mean * report.pair_mean);
  report.pair_se = std::sqrt(var_p / static_cast<double>(n_pairs));

  const double diff = report.group_mean - report.pair_mean;
  const double denom = std::sqrt(report.group_se * report.group_se +
                                 report.pair_se * report.pair_se);
  if (denom == 0.0) {
    report.z_score = diff == 0.0 ? 0.0
                                 : std::numeric_limits<double>::infinity();
  } else {
    report.z_score = diff / denom;
  }
  return report;
}

}  // namespace capo
