#pragma once

// Randomized numerical verification of the inequalities the library relies on.
// Each check draws its own inputs from a seeded generator, evaluates both
// sides, and counts violations beyond an absolute tolerance. Draws are biased
// toward the boundary (exact zeros and ones, tiny values, near-ties) where
// the inequalities are tightest or the continuous extensions kick in.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fastcb/allocation.hpp"
#include "fastcb/divergences.hpp"
#include "fastcb/format.hpp"
#include "fastcb/oracles.hpp"
#include "fastcb/plugin_learning.hpp"
#include "fastcb/random.hpp"

namespace fastcb {

struct CheckResult {
  explicit CheckResult(std::string check_name = {}) : name(std::move(check_name)) {}

  std::string name;
  std::size_t samples = 0;
  std::size_t evaluated = 0;  ///< samples where the inequality applies (e.g. finite KL)
  std::size_t violations = 0;
  double min_slack = kInfinity;
  std::size_t near_tight = 0;
  double max_ratio = 0.0;  ///< largest lhs / rhs over samples with rhs > 0
  std::vector<std::string> witnesses;  ///< a few near-tight or violating inputs

  bool passed() const noexcept { return violations == 0; }
};

struct CheckOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  /// rhs / lhs below this marks a near-tight witness.
  double tight_ratio = 1.05;
  std::size_t max_witnesses = 10;
};

namespace detail {

inline void record(CheckResult& r, double lhs, double rhs, const CheckOptions& o, const std::string& input) {
  ++r.evaluated;
  const double slack = rhs - lhs;
  r.min_slack = std::min(r.min_slack, slack);
  if (rhs > 0.0) r.max_ratio = std::max(r.max_ratio, lhs / rhs);
  const bool violated = lhs > rhs + o.tolerance;
  const bool tight = !violated && lhs > 0.0 && rhs / lhs < o.tight_ratio;
  if (violated) ++r.violations;
  if (tight) ++r.near_tight;
  if ((violated || tight) && r.witnesses.size() < o.max_witnesses)
    r.witnesses.push_back((violated ? "VIOLATION " : "tight ") + input + " lhs=" + format_double(lhs) +
                          " rhs=" + format_double(rhs));
}

/// Probability with extra mass on 0, 1, and tiny / near-one values.
inline double draw_probability(Rng& rng) {
  const double u = uniform01(rng);
  if (u < 0.05) return 0.0;
  if (u < 0.10) return 1.0;
  if (u < 0.20) return uniform01(rng) * 1e-6;
  if (u < 0.25) return 1.0 - uniform01(rng) * 1e-6;
  if (u < 0.40) return std::pow(uniform01(rng), 4.0);
  return uniform01(rng);
}

inline std::string vec_str(std::span<const double> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_double(v[i]);
  os << ')';
  return os.str();
}

inline std::vector<double> draw_simplex(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    // occasional exact zeros and peaked vectors
    const double u = uniform01(rng);
    x = u < 0.15 ? 0.0 : -std::log1p(-uniform01(rng)) * (u < 0.3 ? 50.0 : 1.0);
    total += x;
  }
  if (total == 0.0) {
    v[uniform_index(rng, n)] = 1.0;
    return v;
  }
  for (auto& x : v) x /= total;
  return v;
}

}  // namespace detail

/// kl(p, q) >= (q - p)^2 / (2 (q + p)) whenever kl(p, q) is finite.
inline CheckResult check_refined_pinsker(const CheckOptions& o) {
  CheckResult r{"refined_pinsker"};
  Rng rng(derive_seed(o.seed, 101));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const double p = detail::draw_probability(rng), q = detail::draw_probability(rng);
    const double kl = binary_kl(p, q);
    if (!std::isfinite(kl)) continue;
    detail::record(r, 0.5 * tri_term(q, p), kl, o, "p=" + format_double(p) + " q=" + format_double(q));
  }
  return r;
}

/// (q - p)^2 <= 2 kl(p, q).
inline CheckResult check_pinsker_square(const CheckOptions& o) {
  CheckResult r{"pinsker_square"};
  Rng rng(derive_seed(o.seed, 102));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const double p = detail::draw_probability(rng), q = detail::draw_probability(rng);
    const double kl = binary_kl(p, q);
    if (!std::isfinite(kl)) continue;
    detail::record(r, (q - p) * (q - p), 2.0 * kl, o, "p=" + format_double(p) + " q=" + format_double(q));
  }
  return r;
}

/// H^2(p, q) >= D_tri(p, q) / 4 >= (p - q)^2 / (4 (p + q)) for Bernoulli pairs.
inline CheckResult check_hellinger_tri(const CheckOptions& o) {
  CheckResult r{"hellinger_tri"};
  Rng rng(derive_seed(o.seed, 103));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const double p = detail::draw_probability(rng), q = detail::draw_probability(rng);
    const std::string in = "p=" + format_double(p) + " q=" + format_double(q);
    const double tri = tri_discrimination_bernoulli(p, q);
    detail::record(r, 0.25 * tri, hellinger_bernoulli(p, q), o, in);
    detail::record(r, 0.25 * tri_term(p, q), 0.25 * tri, o, in);
  }
  return r;
}

/// max_a (p_a - q_a)^2 / ((1 - p_a) + (1 - q_a)) <= 4 H^2(p, q) on the simplex.
inline CheckResult check_multinomial_hellinger(const CheckOptions& o) {
  CheckResult r{"multinomial_hellinger"};
  Rng rng(derive_seed(o.seed, 104));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const std::size_t A = 2 + uniform_index(rng, 9);
    const auto p = detail::draw_simplex(A, rng), q = detail::draw_simplex(A, rng);
    double lhs = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      const double den = (1.0 - p[a]) + (1.0 - q[a]);
      if (den > 0.0) lhs = std::max(lhs, (p[a] - q[a]) * (p[a] - q[a]) / den);
    }
    detail::record(r, lhs, 4.0 * hellinger_simplex(p, q), o,
                   "p=" + detail::vec_str(p) + " q=" + detail::vec_str(q));
  }
  return r;
}

/// exp(-log_loss(mix, y)) >= lam exp(-log_loss(y1, y)) + (1 - lam) exp(-log_loss(y2, y)).
inline CheckResult check_exp_concavity(const CheckOptions& o) {
  CheckResult r{"exp_concavity"};
  Rng rng(derive_seed(o.seed, 105));
  auto interior = [&] {
    double v;
    do v = detail::draw_probability(rng);
    while (v <= 0.0 || v >= 1.0);
    return v;
  };
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const double y = detail::draw_probability(rng);
    const double y1 = interior(), y2 = interior(), lam = uniform01(rng);
    const double mix = lam * y1 + (1.0 - lam) * y2;
    const double rhs = std::exp(-log_loss(mix, y));
    const double lhs = lam * std::exp(-log_loss(y1, y)) + (1.0 - lam) * std::exp(-log_loss(y2, y));
    detail::record(r, lhs, rhs, o,
                   "y=" + format_double(y) + " y1=" + format_double(y1) + " y2=" + format_double(y2) +
                       " lam=" + format_double(lam));
  }
  return r;
}

namespace detail {

/// Random (y, f, gamma) with gamma log-uniform on [min_factor A, 1e4], hitting
/// the threshold exactly now and then, and f sometimes a perturbation of y.
struct PerRoundDraw {
  std::vector<double> y, f;
  double gamma;
};

inline PerRoundDraw draw_per_round(Rng& rng, double min_factor) {
  const std::size_t A = 2 + uniform_index(rng, 9);
  PerRoundDraw d{std::vector<double>(A), std::vector<double>(A), 0.0};
  const double lo = min_factor * static_cast<double>(A), hi = 1e4;
  d.gamma = uniform01(rng) < 0.1 ? lo : lo * std::exp(uniform01(rng) * std::log(hi / lo));
  const double mode = uniform01(rng);
  for (std::size_t a = 0; a < A; ++a) {
    d.y[a] = draw_probability(rng);
    if (mode < 0.3) {
      d.f[a] = std::clamp(d.y[a] * (1.0 + 0.2 * (uniform01(rng) - 0.5)), 0.0, 1.0);
    } else if (mode < 0.4) {
      d.f[a] = d.y[a];
    } else {
      d.f[a] = draw_probability(rng);
    }
  }
  return d;
}

}  // namespace detail

/// Per-round inequality of the reweighted rule in the loss setting, gamma >= 2A.
inline CheckResult check_per_round_losses(const CheckOptions& o) {
  CheckResult r{"per_round_losses"};
  Rng rng(derive_seed(o.seed, 106));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const auto d = detail::draw_per_round(rng, 2.0);
    const auto p = reweighted_igw(d.y, d.gamma);
    const auto s = per_round_gap_losses(p, d.y, d.f, d.gamma);
    detail::record(r, s.lhs, s.rhs, o,
                   "y=" + detail::vec_str(d.y) + " f=" + detail::vec_str(d.f) + " gamma=" + format_double(d.gamma));
  }
  return r;
}

/// Per-round inequality of the reward rule, gamma >= 4A.
inline CheckResult check_per_round_rewards(const CheckOptions& o) {
  CheckResult r{"per_round_rewards"};
  Rng rng(derive_seed(o.seed, 107));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const auto d = detail::draw_per_round(rng, 4.0);
    const auto p = reward_igw(d.y, d.gamma);
    const auto s = per_round_gap_rewards(p, d.y, d.f, d.gamma);
    detail::record(r, s.lhs, s.rhs, o,
                   "y=" + detail::vec_str(d.y) + " f=" + detail::vec_str(d.f) + " gamma=" + format_double(d.gamma));
  }
  return r;
}

/// Aggregation oracle: log-loss regret <= log|F| on random sequences over
/// random tabular classes whose values stay inside (0, 1).
/// `samples` is the number of sequences.
inline CheckResult check_aggregation_regret(const CheckOptions& o, std::size_t length = 1000,
                                            std::size_t max_class = 64) {
  CheckResult r{"aggregation_regret"};
  Rng rng(derive_seed(o.seed, 108));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const std::size_t F = 1 + uniform_index(rng, max_class);
    const std::size_t X = 1 + uniform_index(rng, 8), A = 1 + uniform_index(rng, 4);
    std::vector<TabularFunction> fs;
    for (std::size_t k = 0; k < F; ++k) {
      std::vector<double> v(X * A);
      for (auto& x : v) x = 1e-3 + (1.0 - 2e-3) * uniform01(rng);
      fs.emplace_back(X, A, std::move(v));
    }
    FiniteClass cls(std::move(fs));
    AggregationOracle oracle(cls);
    std::vector<Example> trace;
    trace.reserve(length);
    const double style = uniform01(rng);
    for (std::size_t t = 0; t < length; ++t) {
      Example ex{uniform_index(rng, X), uniform_index(rng, A), 0.0};
      if (style < 0.4) {
        ex.outcome = bernoulli(rng, 0.5) ? 1.0 : 0.0;
      } else if (style < 0.7) {
        ex.outcome = uniform01(rng);
      } else {
        // Outcomes drawn from one member, so the class is realizable.
        ex.outcome = bernoulli(rng, cls[0](ex.context, ex.action)) ? 1.0 : 0.0;
      }
      oracle.update(Context{ex.context, {}}, ex.action, ex.outcome);
      trace.push_back(ex);
    }
    const double regret = log_loss_regret(oracle.record(), cls, trace);
    detail::record(r, regret, std::log(static_cast<double>(F)), o, "|F|=" + std::to_string(F));
  }
  return r;
}

namespace detail {

/// Random finite-support problem: up to 10 atoms, A in {2..6}, means skewed
/// toward small losses so that L* is often tiny.
inline FiniteDistribution draw_distribution(Rng& rng) {
  const std::size_t A = 2 + uniform_index(rng, 5);
  const std::size_t atoms = 1 + uniform_index(rng, 10);
  std::vector<double> w(atoms);
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log1p(-uniform01(rng)));
  std::vector<DistributionAtom> out;
  for (std::size_t k = 0; k < atoms; ++k) {
    DistributionAtom atom{k, w[k] / total, std::vector<double>(A)};
    for (auto& m : atom.means) m = draw_probability(rng);
    out.push_back(std::move(atom));
  }
  // Renormalize exactly so the last weight absorbs rounding.
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < atoms; ++k) head += out[k].weight;
  out.back().weight = 1.0 - head;
  return FiniteDistribution(std::move(out));
}

inline TabularFunction draw_function_near(const FiniteDistribution& dist, Rng& rng) {
  const TabularFunction truth = dist.truth();
  std::vector<double> v(truth.values().begin(), truth.values().end());
  const double mode = uniform01(rng);
  for (auto& x : v) {
    if (mode < 0.4)
      x = draw_probability(rng);
    else
      x = std::clamp(x + (uniform01(rng) - 0.5) * std::pow(10.0, -6.0 * uniform01(rng)), 0.0, 1.0);
  }
  return TabularFunction(truth.num_contexts(), truth.num_actions(), std::move(v));
}

}  // namespace detail

/// L(pi_f) - L* <= 8 sqrt(L* Delta) + 17 Delta on random finite problems.
inline CheckResult check_regret_decomposition(const CheckOptions& o) {
  CheckResult r{"regret_decomposition"};
  Rng rng(derive_seed(o.seed, 109));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const auto dist = detail::draw_distribution(rng);
    const auto f = detail::draw_function_near(dist, rng);
    const auto s = regret_decomposition_check(f, dist);
    detail::record(r, s.lhs, s.rhs, o, "f=" + detail::vec_str(f.values()));
  }
  return r;
}

/// E[f*(x, pi(x)) + f(x, pi(x))] <= Delta + 4 L(pi) for random f and pi.
inline CheckResult check_policy_mass(const CheckOptions& o) {
  CheckResult r{"policy_mass"};
  Rng rng(derive_seed(o.seed, 110));
  for (std::size_t i = 0; i < o.samples; ++i, ++r.samples) {
    const auto dist = detail::draw_distribution(rng);
    const auto f = detail::draw_function_near(dist, rng);
    Policy pi(dist.num_contexts());
    const bool greedy = uniform01(rng) < 0.5;
    const Policy induced = induced_policy(f);
    for (std::size_t x = 0; x < pi.size(); ++x)
      pi[x] = greedy ? induced[x] : uniform_index(rng, dist.num_actions());
    const auto s = policy_mass_check(f, pi, dist);
    detail::record(r, s.lhs, s.rhs, o, "f=" + detail::vec_str(f.values()));
  }
  return r;
}

}  // namespace fastcb
