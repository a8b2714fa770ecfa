// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The capo authors

#include "capo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "capo/advantage.hpp"
#include "capo/metrics.hpp"
#include "capo/objective.hpp"
#include "capo/rng.hpp"
#include "capo/toyenv.hpp"
#include "capo/tts.hpp"

namespace capo {

namespace {

double rel_err(double a, double b, double floor) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Error of an algebraic vector identity, relative to the vectors' scale so
// rounding residue on true-zero entries is not misread as disagreement.
double vector_rel_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  if (scale == 0.0) return diff == 0.0 ? 0.0 : 1.0;
  return diff / scale;
}

PolicyParams random_params(Rng& rng, int nq, int L, int V, double scale) {
  PolicyParams p = PolicyParams::zeros(nq, L, V);
  for (double& v : p.logits) v = rng.normal(0.0, scale);
  return p;
}

ToyQuestion dummy_question(int id, int L, int V, Rng& rng) {
  ToyQuestion q;
  q.id = id;
  q.truth.resize(static_cast<std::size_t>(L));
  q.decoy.resize(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) {
    q.truth[static_cast<std::size_t>(t)] = static_cast<int>(rng.uniform_int(0, V - 1));
    q.decoy[static_cast<std::size_t>(t)] = static_cast<int>(rng.uniform_int(0, V - 1));
  }
  return q;
}

// Random groups sampled from `sampler` params; rewards are re-randomized so
// both classes appear with reasonable frequency.
std::vector<Group> random_groups(Rng& rng, const PolicyParams& sampler,
                                 std::size_t n_groups, int group_size,
                                 const PolicyParams* ref = nullptr) {
  std::vector<Group> groups;
  groups.reserve(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const int qid = static_cast<int>(rng.uniform_int(0, sampler.n_questions - 1));
    ToyQuestion question = dummy_question(qid, sampler.answer_len, sampler.vocab, rng);
    Group group = sample_group(sampler, question, group_size, 1.0, rng, ref);
    for (Response& r : group.responses) {
      r.reward = static_cast<int>(rng.uniform_int(0, 1));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

double fd_gradient_entry(std::span<const Group> groups,
                         std::span<const AdvantageVector> advantages,
                         PolicyParams& params, const ObjectiveConfig& cfg,
                         std::size_t k, double h) {
  const double saved = params.logits[k];
  params.logits[k] = saved + h;
  const double up = batch_objective(groups, advantages, params, cfg);
  params.logits[k] = saved - h;
  const double down = batch_objective(groups, advantages, params, cfg);
  params.logits[k] = saved;
  return (up - down) / (2.0 * h);
}

// Any token ratio near a clip boundary makes finite differences step across
// the kink; such instances are rejected and redrawn.
bool near_clip_boundary(std::span<const Group> groups, const PolicyParams& params,
                        double eps, double margin) {
  for (const Group& g : groups) {
    const int q = static_cast<int>(g.question_id);
    for (const Response& r : g.responses) {
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        std::vector<double> lp(static_cast<std::size_t>(params.vocab));
        log_softmax(params.row(q, static_cast<int>(t)), lp);
        const double ratio =
            std::exp(lp[static_cast<std::size_t>(r.tokens[t])] - r.logp_old[t]);
        if (std::abs(ratio - (1.0 - eps)) < margin ||
            std::abs(ratio - (1.0 + eps)) < margin) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

CheckReport check_gradients(std::size_t n_instances, std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "gradients"};
  for (std::size_t i = 0; i < n_instances; ++i) {
    const int nq = static_cast<int>(rng.uniform_int(1, 8));
    const int L = static_cast<int>(rng.uniform_int(1, 3));
    const int V = static_cast<int>(rng.uniform_int(2, 6));
    const int G = static_cast<int>(rng.uniform_int(2, 6));
    const std::size_t n_groups = static_cast<std::size_t>(rng.uniform_int(1, 3));
    ObjectiveConfig cfg;
    cfg.clip_eps = 0.1 + 0.2 * rng.uniform01();
    cfg.kl_coeff = rng.uniform_int(0, 1) == 0 ? 0.0 : 0.05;

    PolicyParams sampler = random_params(rng, nq, L, V, 1.0);
    PolicyParams ref = random_params(rng, nq, L, V, 1.0);
    std::vector<Group> groups;
    PolicyParams params = sampler;
    for (int tries = 0; tries < 100; ++tries) {
      groups = random_groups(rng, sampler, n_groups, G, &ref);
      params = sampler;
      // theta != theta_old: perturb after sampling.
      for (double& v : params.logits) v += rng.normal(0.0, 0.05);
      if (!near_clip_boundary(groups, params, cfg.clip_eps, 1e-3)) break;
    }
    std::vector<AdvantageVector> advantages;
    for (const Group& g : groups) {
      AdvantageVector adv(g.responses.size());
      for (double& a : adv) a = rng.normal(0.0, 1.0);
      advantages.push_back(std::move(adv));
    }

    const GradientVector grad = analytic_gradient(groups, advantages, params, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double fd =
          fd_gradient_entry(groups, advantages, params, cfg, k, 1e-5);
      worst = std::max(worst, rel_err(grad[k], fd, 1e-8));
    }
    report.max_err = std::max(report.max_err, worst);
    if (worst > 1e-6) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

CheckReport check_grpo_identity(std::size_t n_groups, std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "grpo-identity"};
  for (std::size_t i = 0; i < n_groups; ++i) {
    const int G = static_cast<int>(rng.uniform_int(2, 8));
    PolicyParams params = random_params(rng, 4, 3, 6, 1.0);
    std::vector<Group> groups = random_groups(rng, params, 1, G);
    const Group& group = groups.front();

    std::vector<int> rewards(group.responses.size());
    for (std::size_t k = 0; k < rewards.size(); ++k) {
      rewards[k] = group.responses[k].reward;
    }
    std::vector<AdvantageVector> advantages{grpo_advantage(rewards, false)};
    GradientVector lhs = pairwise_grpo_gradient(group, params);
    GradientVector rhs = reinforce_gradient(groups, advantages, params);
    const double g2 = static_cast<double>(G) * static_cast<double>(G);
    for (double& v : rhs) v *= g2;
    const double err = vector_rel_err(lhs, rhs);
    report.max_err = std::max(report.max_err, err);
    if (err > 1e-10) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

CheckReport check_logistic_identity(std::size_t n_groups, std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "logistic-identity"};
  for (std::size_t i = 0; i < n_groups; ++i) {
    const int G = static_cast<int>(rng.uniform_int(2, 8));
    const double tau = 0.4 + rng.uniform01();
    PolicyParams params = random_params(rng, 4, 3, 6, 1.0);
    std::vector<Group> groups = random_groups(rng, params, 1, G);
    const Group& group = groups.front();

    // Advantages use lpm under the same params the gradients are taken at.
    std::vector<double> lpms(group.responses.size());
    std::vector<int> rewards(group.responses.size());
    for (std::size_t k = 0; k < group.responses.size(); ++k) {
      double sum = 0.0;
      const Response& r = group.responses[k];
      for (std::size_t t = 0; t < r.tokens.size(); ++t) {
        std::vector<double> lp(static_cast<std::size_t>(params.vocab));
        log_softmax(params.row(static_cast<int>(group.question_id),
                               static_cast<int>(t)),
                    lp);
        sum += lp[static_cast<std::size_t>(r.tokens[t])];
      }
      lpms[k] = sum / static_cast<double>(r.tokens.size());
      rewards[k] = r.reward;
    }
    std::vector<AdvantageVector> advantages{capo_advantage(lpms, rewards, tau)};
    GradientVector lhs = pairwise_logistic_gradient(group, params, tau);
    GradientVector rhs = reinforce_gradient(groups, advantages, params);
    const double err = vector_rel_err(lhs, rhs);
    report.max_err = std::max(report.max_err, err);
    if (err > 1e-10) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

CheckReport check_clip_reinforce_identity(std::size_t n_instances,
                                          std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "clip-reinforce-identity"};
  for (std::size_t i = 0; i < n_instances; ++i) {
    const int G = static_cast<int>(rng.uniform_int(2, 8));
    const std::size_t n_groups = static_cast<std::size_t>(rng.uniform_int(1, 4));
    PolicyParams params = random_params(rng, 6, 3, 6, 1.0);
    // Sampling from `params` itself makes logp_old match: theta = theta_old.
    std::vector<Group> groups = random_groups(rng, params, n_groups, G);
    std::vector<AdvantageVector> advantages;
    for (const Group& g : groups) {
      AdvantageVector adv(g.responses.size());
      for (double& a : adv) a = rng.normal(0.0, 1.5);
      advantages.push_back(std::move(adv));
    }
    ObjectiveConfig cfg;
    cfg.clip_eps = 0.2;
    cfg.kl_coeff = 0.0;
    GradientVector lhs = analytic_gradient(groups, advantages, params, cfg);
    GradientVector rhs = reinforce_gradient(groups, advantages, params);
    const double err = vector_rel_err(lhs, rhs);
    report.max_err = std::max(report.max_err, err);
    if (err > 1e-10) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

CheckReport check_auc_oracle(std::size_t n_instances, std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "auc-oracle"};
  for (std::size_t i = 0; i < n_instances; ++i) {
    const int n = static_cast<int>(rng.uniform_int(2, 200));
    // A coarse grid about half the time forces plenty of ties.
    const bool gridded = rng.uniform_int(0, 1) == 0;
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> rewards(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      scores[static_cast<std::size_t>(k)] =
          gridded ? static_cast<double>(rng.uniform_int(-5, 5))
                  : rng.normal(0.0, 1.0);
      rewards[static_cast<std::size_t>(k)] = static_cast<int>(rng.uniform_int(0, 1));
    }
    const auto fast = auc(scores, rewards);

    // O(n^2) enumeration with the same integer credit scheme.
    std::int64_t n_pos = 0;
    for (int r : rewards) n_pos += r;
    const std::int64_t n_neg = n - n_pos;
    std::optional<double> brute;
    if (n_pos > 0 && n_neg > 0) {
      std::int64_t credit2 = 0;
      for (int a = 0; a < n; ++a) {
        if (rewards[static_cast<std::size_t>(a)] != 1) continue;
        for (int b = 0; b < n; ++b) {
          if (rewards[static_cast<std::size_t>(b)] != 0) continue;
          const double sa = scores[static_cast<std::size_t>(a)];
          const double sb = scores[static_cast<std::size_t>(b)];
          if (sa > sb) {
            credit2 += 2;
          } else if (sa == sb) {
            credit2 += 1;
          }
        }
      }
      brute = static_cast<double>(credit2) / static_cast<double>(2 * n_pos * n_neg);
    }
    if (fast != brute) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

CheckReport check_tts_oracle(std::size_t n_sets, std::uint64_t seed) {
  Rng rng(seed);
  CheckReport report{.name = "tts-oracle"};
  for (std::size_t i = 0; i < n_sets; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, 24));
    const int n_labels = static_cast<int>(rng.uniform_int(1, 6));
    // lpm values on a coarse grid so exact confidence ties occur.
    std::vector<Response> responses(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      Response& r = responses[static_cast<std::size_t>(k)];
      r.question_id = 0;
      r.tokens = {0};
      r.logp_old = {static_cast<double>(rng.uniform_int(-8, 0)) / 2.0};
      r.answer_label = rng.uniform_int(0, n_labels - 1);
    }

    // Oracle: group, sum exp(lpm) over sorted supporter values, argmax with
    // the documented tie-break.
    std::map<std::int64_t, std::vector<double>> by_label;
    for (const Response& r : responses) {
      by_label[r.answer_label].push_back(lpm(r.logp_old));
    }
    std::int64_t best_label = 0;
    double best_c = -1.0;
    std::size_t best_count = 0;
    bool first = true;
    for (auto& [label, lpms] : by_label) {
      std::sort(lpms.begin(), lpms.end());
      double c = 0.0;
      for (double v : lpms) c += std::exp(v);
      const bool better =
          first || c > best_c ||
          (c == best_c && (lpms.size() > best_count ||
                           (lpms.size() == best_count && label < best_label)));
      if (better) {
        best_label = label;
        best_c = c;
        best_count = lpms.size();
        first = false;
      }
    }
    if (select_answer(responses) != best_label) ++report.n_failed;
    ++report.n_run;
  }
  return report;
}

}  // namespace capo
