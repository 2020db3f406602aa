#pragma once

// Batch cost-sensitive classification over finite classes.
//
// Plug-in classifiers fit a regression function to full-information
// cost-sensitive data and act greedily on it. Fitting by least squares is
// not first-order: on the two-context, two-action instance built by
// LowerBoundInstance it picks a wrong function with constant probability
// and pays regret of order 1/sqrt(n) while L* is of order 1/n. Fitting by
// log loss (maximum likelihood) avoids this. Everything here is exact on
// finite-support distributions so the accompanying inequalities can be
// checked as assertions rather than estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fastcb/allocation.hpp"
#include "fastcb/divergences.hpp"
#include "fastcb/oracles.hpp"
#include "fastcb/random.hpp"

namespace fastcb {

struct DistributionAtom {
  std::size_t context = 0;
  double weight = 0.0;
  std::vector<double> means;          ///< per-action conditional mean loss f*(x, a)
  std::vector<bool> deterministic{};  ///< loss equals its mean a.s. (otherwise Bernoulli)
};

/// Finite-support distribution over contexts with per-action loss means.
class FiniteDistribution {
 public:
  FiniteDistribution() = default;

  explicit FiniteDistribution(std::vector<DistributionAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("FiniteDistribution: no atoms");
    actions_ = atoms_.front().means.size();
    if (actions_ == 0) throw std::invalid_argument("FiniteDistribution: no actions");
    double total = 0.0;
    for (auto& atom : atoms_) {
      if (atom.means.size() != actions_)
        throw std::invalid_argument("FiniteDistribution: atoms disagree on the action count");
      if (!(atom.weight >= 0.0)) throw std::invalid_argument("FiniteDistribution: negative weight");
      for (double m : atom.means) detail::require_probability(m, "FiniteDistribution mean");
      if (atom.deterministic.empty()) atom.deterministic.assign(actions_, false);
      if (atom.deterministic.size() != actions_)
        throw std::invalid_argument("FiniteDistribution: deterministic flags have the wrong size");
      contexts_ = std::max(contexts_, atom.context + 1);
      total += atom.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("FiniteDistribution: weights do not sum to 1");
  }

  const std::vector<DistributionAtom>& atoms() const noexcept { return atoms_; }
  std::size_t num_actions() const noexcept { return actions_; }
  std::size_t num_contexts() const noexcept { return contexts_; }

  /// The conditional-mean function as a table (contexts without atoms map to 0).
  TabularFunction truth() const {
    std::vector<double> values(contexts_ * actions_, 0.0);
    for (const auto& atom : atoms_)
      std::copy(atom.means.begin(), atom.means.end(), values.begin() + atom.context * actions_);
    return TabularFunction(contexts_, actions_, std::move(values));
  }

 private:
  std::vector<DistributionAtom> atoms_;
  std::size_t actions_ = 0;
  std::size_t contexts_ = 0;
};

/// Deterministic policy: context id -> action.
using Policy = std::vector<std::size_t>;

/// pi_f(x) = lowest-index argmin_a f(x, a).
inline Policy induced_policy(const TabularFunction& f) {
  Policy pi(f.num_contexts());
  for (std::size_t x = 0; x < f.num_contexts(); ++x) pi[x] = argmin_lowest(f.row(x));
  return pi;
}

/// L(pi) = E[loss(pi(x))], exact over the atoms.
inline double exact_risk(const Policy& pi, const FiniteDistribution& dist) {
  double out = 0.0;
  for (const auto& atom : dist.atoms()) {
    if (atom.context >= pi.size()) throw std::invalid_argument("exact_risk: policy misses a context");
    out += atom.weight * atom.means[pi[atom.context]];
  }
  return out;
}

/// L* = E[min_a f*(x, a)].
inline double optimal_risk(const FiniteDistribution& dist) {
  double out = 0.0;
  for (const auto& atom : dist.atoms())
    out += atom.weight * *std::min_element(atom.means.begin(), atom.means.end());
  return out;
}

/// E_D[ sum_a (fhat(x,a) - f*(x,a))^2 / (fhat(x,a) + f*(x,a)) ].
inline double tri_generalization_error(const TabularFunction& fhat, const FiniteDistribution& dist) {
  double out = 0.0;
  for (const auto& atom : dist.atoms()) {
    double inner = 0.0;
    for (std::size_t a = 0; a < dist.num_actions(); ++a)
      inner += tri_term(fhat(atom.context, a), atom.means[a]);
    out += atom.weight * inner;
  }
  return out;
}

/// Regret decomposition for the plug-in policy of f:
///   L(pi_f) - L* <= 8 sqrt(L* Delta) + 17 Delta,
/// Delta being the triangular generalization error of f.
inline InequalitySides regret_decomposition_check(const TabularFunction& f, const FiniteDistribution& dist) {
  const double lstar = optimal_risk(dist);
  const double delta = tri_generalization_error(f, dist);
  return {exact_risk(induced_policy(f), dist) - lstar, 8.0 * std::sqrt(lstar * delta) + 17.0 * delta};
}

/// For any f and policy pi:
///   E[f*(x, pi(x)) + f(x, pi(x))] <= Delta + 4 L(pi).
inline InequalitySides policy_mass_check(const TabularFunction& f, const Policy& pi,
                                         const FiniteDistribution& dist) {
  InequalitySides out;
  for (const auto& atom : dist.atoms())
    out.lhs += atom.weight * (atom.means[pi[atom.context]] + f(atom.context, pi[atom.context]));
  out.rhs = tri_generalization_error(f, dist) + 4.0 * exact_risk(pi, dist);
  return out;
}

/// 16 sqrt(L* A C / n) + 68 A C / n with C = log|F| + log(A/delta).
inline double plugin_bound(double lstar, std::size_t num_actions, std::size_t class_size, double delta,
                           double n) {
  if (!(lstar >= 0.0) || num_actions == 0 || class_size == 0 || !(delta > 0.0 && delta < 1.0) || !(n > 0.0))
    throw std::invalid_argument("plugin_bound: invalid arguments");
  const double A = static_cast<double>(num_actions);
  const double c = std::log(static_cast<double>(class_size)) + std::log(A / delta);
  return 16.0 * std::sqrt(lstar * A * c / n) + 68.0 * A * c / n;
}

// ---------------------------------------------------------------------------
// Datasets and empirical objectives

struct CscRecord {
  std::size_t context = 0;
  std::vector<double> losses;
};

using CscDataset = std::vector<CscRecord>;

/// Per-(context, action) sums; every empirical objective used here depends on
/// the data only through (count, sum of losses, sum of squared losses).
struct CellStats {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

class CscStatistics {
 public:
  CscStatistics(std::size_t num_contexts, std::size_t num_actions)
      : contexts_(num_contexts), actions_(num_actions), cells_(num_contexts * num_actions) {}

  static CscStatistics from_dataset(const CscDataset& data, std::size_t num_contexts, std::size_t num_actions) {
    CscStatistics stats(num_contexts, num_actions);
    for (const auto& r : data) {
      if (r.context >= num_contexts || r.losses.size() != num_actions)
        throw std::invalid_argument("CscStatistics: record does not match the class shape");
      for (std::size_t a = 0; a < num_actions; ++a) {
        detail::require_probability(r.losses[a], "CscDataset loss");
        auto& c = stats.cell(r.context, a);
        c.count += 1.0;
        c.sum += r.losses[a];
        c.sum_sq += r.losses[a] * r.losses[a];
      }
    }
    return stats;
  }

  CellStats& cell(std::size_t x, std::size_t a) { return cells_[x * actions_ + a]; }
  const CellStats& cell(std::size_t x, std::size_t a) const { return cells_[x * actions_ + a]; }
  std::size_t num_contexts() const noexcept { return contexts_; }
  std::size_t num_actions() const noexcept { return actions_; }

  bool empty() const {
    return std::all_of(cells_.begin(), cells_.end(), [](const CellStats& c) { return c.count == 0.0; });
  }

 private:
  std::size_t contexts_, actions_;
  std::vector<CellStats> cells_;
};

/// sum_t sum_a (f(x_t, a) - loss_t(a))^2
inline double empirical_square_loss(const TabularFunction& f, const CscStatistics& s) {
  double out = 0.0;
  for (std::size_t x = 0; x < s.num_contexts(); ++x)
    for (std::size_t a = 0; a < s.num_actions(); ++a) {
      const auto& c = s.cell(x, a);
      if (c.count == 0.0) continue;
      const double u = f(x, a);
      out += c.count * u * u - 2.0 * u * c.sum + c.sum_sq;
    }
  return out;
}

/// sum_t sum_a log_loss(f(x_t, a), loss_t(a)); log loss is affine in the
/// outcome so only the sums are needed.
inline double empirical_log_loss(const TabularFunction& f, const CscStatistics& s) {
  double out = 0.0;
  for (std::size_t x = 0; x < s.num_contexts(); ++x)
    for (std::size_t a = 0; a < s.num_actions(); ++a) {
      const auto& c = s.cell(x, a);
      if (c.count == 0.0) continue;
      const double u = f(x, a);
      const double ones = c.sum, zeros = c.count - c.sum;
      if (ones > 0.0) {
        if (u == 0.0) return kInfinity;
        out -= ones * std::log(u);
      }
      if (zeros > 0.0) {
        if (u == 1.0) return kInfinity;
        out -= zeros * std::log1p(-u);
      }
    }
  return out;
}

/// sum_t loss_t(pi(x_t))
inline double empirical_policy_loss(const Policy& pi, const CscStatistics& s) {
  double out = 0.0;
  for (std::size_t x = 0; x < s.num_contexts(); ++x) out += s.cell(x, pi[x]).sum;
  return out;
}

struct FitResult {
  std::size_t index = 0;
  /// Set when every candidate had infinite loss and the lowest index was returned by default.
  bool all_infinite = false;
};

namespace detail {

inline void check_fit_input(const CscStatistics& s, const FiniteClass& cls, const char* what) {
  if (s.empty()) throw std::invalid_argument(std::string(what) + ": empty dataset");
  if (cls.num_contexts() != s.num_contexts() || cls.num_actions() != s.num_actions())
    throw std::invalid_argument(std::string(what) + ": dataset and class disagree on shape");
}

template <class Objective>
FitResult lowest_index_argmin(std::size_t count, Objective&& objective) {
  FitResult best;
  double best_value = kInfinity;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = objective(i);
    if (v < best_value) {
      best_value = v;
      best.index = i;
    }
  }
  best.all_infinite = !(best_value < kInfinity);
  return best;
}

}  // namespace detail

inline std::size_t fit_least_squares(const CscStatistics& s, const FiniteClass& cls) {
  detail::check_fit_input(s, cls, "fit_least_squares");
  return detail::lowest_index_argmin(cls.size(), [&](std::size_t i) { return empirical_square_loss(cls[i], s); })
      .index;
}

inline FitResult fit_logloss_mle(const CscStatistics& s, const FiniteClass& cls) {
  detail::check_fit_input(s, cls, "fit_logloss_mle");
  return detail::lowest_index_argmin(cls.size(), [&](std::size_t i) { return empirical_log_loss(cls[i], s); });
}

/// Empirical risk minimization over the induced policies {pi_f : f in F}.
inline std::size_t fit_erm_policy(const CscStatistics& s, const FiniteClass& cls) {
  detail::check_fit_input(s, cls, "fit_erm_policy");
  return detail::lowest_index_argmin(
             cls.size(), [&](std::size_t i) { return empirical_policy_loss(induced_policy(cls[i]), s); })
      .index;
}

inline std::size_t fit_least_squares(const CscDataset& data, const FiniteClass& cls) {
  if (data.empty()) throw std::invalid_argument("fit_least_squares: empty dataset");
  return fit_least_squares(CscStatistics::from_dataset(data, cls.num_contexts(), cls.num_actions()), cls);
}

inline FitResult fit_logloss_mle(const CscDataset& data, const FiniteClass& cls) {
  if (data.empty()) throw std::invalid_argument("fit_logloss_mle: empty dataset");
  return fit_logloss_mle(CscStatistics::from_dataset(data, cls.num_contexts(), cls.num_actions()), cls);
}

inline std::size_t fit_erm_policy(const CscDataset& data, const FiniteClass& cls) {
  if (data.empty()) throw std::invalid_argument("fit_erm_policy: empty dataset");
  return fit_erm_policy(CscStatistics::from_dataset(data, cls.num_contexts(), cls.num_actions()), cls);
}

struct LabeledContext {
  std::size_t context = 0;
  std::size_t label = 0;
};

/// Multiclass MLE where 1 - f(x, y) is the predicted probability of label y:
/// argmax_f sum_i log(1 - f(x_i, y_i)).
inline FitResult fit_multinomial_mle(std::span<const LabeledContext> labels, const FiniteClass& cls) {
  if (labels.empty()) throw std::invalid_argument("fit_multinomial_mle: no labels");
  for (const auto& l : labels)
    if (l.context >= cls.num_contexts() || l.label >= cls.num_actions())
      throw std::invalid_argument("fit_multinomial_mle: label outside the class domain");
  return detail::lowest_index_argmin(cls.size(), [&](std::size_t i) {
    double nll = 0.0;
    for (const auto& l : labels) {
      const double prob = 1.0 - cls[i](l.context, l.label);
      if (prob <= 0.0) return kInfinity;
      nll -= std::log(prob);
    }
    return nll;
  });
}

/// n i.i.d. draws from dist: context by weight, each loss Bernoulli(mean) or
/// equal to its mean when flagged deterministic.
inline CscDataset sample_dataset(const FiniteDistribution& dist, std::size_t n, Rng& rng) {
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& atom : dist.atoms()) cdf.push_back(acc += atom.weight);
  CscDataset data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng) * acc;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, cdf.size() - 1);
    const auto& atom = dist.atoms()[k];
    CscRecord r{atom.context, std::vector<double>(dist.num_actions())};
    for (std::size_t a = 0; a < dist.num_actions(); ++a)
      r.losses[a] = atom.deterministic[a] ? atom.means[a] : (bernoulli(rng, atom.means[a]) ? 1.0 : 0.0);
    data.push_back(std::move(r));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Least-squares failure instance

/// Two contexts x1, x2 (ids 0, 1) and two actions a1, a2 (ids 0, 1), with
/// eps = 1/n, P(x2) = eps and
///
///            f*(x, a1)   f*(x, a2)   ftilde(x, a1)    ftilde(x, a2)
///   x1       mu          nu          sqrt(eps / 16)   nu
///   x2       1/2         1/2         0                1/2
///
/// where mu = 2^7 eps and nu = sqrt(eps) / 8. Losses of a1 are Bernoulli,
/// losses of a2 are deterministic, so both candidates fit a2 perfectly and
/// only the a1 outcomes matter. Requires eps < 2^-22, which makes mu < nu.
struct LowerBoundInstance {
  static constexpr std::size_t kFstar = 0;
  static constexpr std::size_t kFtilde = 1;

  std::uint64_t n = 0;
  double eps = 0.0;
  double p = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double lstar_bound = 0.0;
  FiniteClass cls;
  FiniteDistribution dist;

  static LowerBoundInstance make(std::uint64_t n) {
    if (n <= (std::uint64_t{1} << 22))
      throw std::invalid_argument("LowerBoundInstance: need n > 2^22 so that mu < nu");
    LowerBoundInstance inst;
    inst.n = n;
    inst.eps = 1.0 / static_cast<double>(n);
    inst.p = inst.eps;
    inst.mu = 128.0 * inst.eps;
    inst.nu = std::sqrt(inst.eps) / 8.0;
    inst.lstar_bound = 256.0 * inst.eps;
    const TabularFunction fstar(2, 2, {inst.mu, inst.nu, 0.5, 0.5});
    const TabularFunction ftilde(2, 2, {std::sqrt(inst.eps / 16.0), inst.nu, 0.0, 0.5});
    inst.cls = FiniteClass({fstar, ftilde});
    inst.dist = FiniteDistribution({
        DistributionAtom{0, 1.0 - inst.p, {inst.mu, inst.nu}, {false, true}},
        DistributionAtom{1, inst.p, {0.5, 0.5}, {false, true}},
    });
    return inst;
  }
};

/// Sufficient statistics of an n-sample from the instance.
struct LowerBoundCounts {
  std::uint64_t n1 = 0, n2 = 0;
  std::uint64_t n1_ones = 0, n2_ones = 0;  ///< examples with loss(a1) = 1
};

/// n2 ~ Bin(n, p), n2(1) ~ Bin(n2, 1/2), n1 = n - n2, n1(1) ~ Bin(n1, mu).
inline LowerBoundCounts sample_lower_bound_counts(std::uint64_t n, double p, double mu, Rng& rng) {
  LowerBoundCounts c;
  c.n2 = binomial(rng, n, p);
  c.n2_ones = binomial(rng, c.n2, 0.5);
  c.n1 = n - c.n2;
  c.n1_ones = binomial(rng, c.n1, mu);
  return c;
}

struct ReplicateOutcome {
  LowerBoundCounts counts;
  std::size_t ls_pick = 0;
  std::size_t kl_pick = 0;
  std::size_t erm_pick = 0;
  double ls_regret = 0.0;
  double kl_regret = 0.0;
  double erm_regret = 0.0;
  double lstar = 0.0;
  bool event_one_b_example = false;  ///< n2 = n2(0) = 1
  bool event_many_a = false;         ///< n1 >= 3n/8
  bool event_low_mean = false;       ///< muhat1 <= 1.5 mu
  bool bad_event() const noexcept { return event_one_b_example && event_many_a && event_low_mean; }
};

/// Empirical statistics of the instance's dataset, rebuilt from the counts.
inline CscStatistics lower_bound_statistics(const LowerBoundInstance& inst, const LowerBoundCounts& c) {
  CscStatistics s(2, 2);
  const double n1 = static_cast<double>(c.n1), n2 = static_cast<double>(c.n2);
  s.cell(0, 0) = {n1, double(c.n1_ones), double(c.n1_ones)};
  s.cell(0, 1) = {n1, n1 * inst.nu, n1 * inst.nu * inst.nu};
  s.cell(1, 0) = {n2, double(c.n2_ones), double(c.n2_ones)};
  s.cell(1, 1) = {n2, n2 * 0.5, n2 * 0.25};
  return s;
}

inline ReplicateOutcome lower_bound_replicate(const LowerBoundInstance& inst, std::uint64_t seed) {
  if (inst.cls.size() != 2 || !(inst.mu < inst.nu))
    throw std::invalid_argument("lower_bound_replicate: invalid instance");
  Rng rng(derive_seed(seed, 0x4C42));
  ReplicateOutcome out;
  out.counts = sample_lower_bound_counts(inst.n, inst.p, inst.mu, rng);
  const CscStatistics stats = lower_bound_statistics(inst, out.counts);

  out.lstar = optimal_risk(inst.dist);
  auto regret = [&](std::size_t pick) { return exact_risk(induced_policy(inst.cls[pick]), inst.dist) - out.lstar; };
  out.ls_pick = fit_least_squares(stats, inst.cls);
  out.kl_pick = fit_logloss_mle(stats, inst.cls).index;
  out.erm_pick = fit_erm_policy(stats, inst.cls);
  out.ls_regret = regret(out.ls_pick);
  out.kl_regret = regret(out.kl_pick);
  out.erm_regret = regret(out.erm_pick);

  const auto& c = out.counts;
  out.event_one_b_example = c.n2 == 1 && c.n2_ones == 0;
  out.event_many_a = 8 * c.n1 >= 3 * inst.n;
  out.event_low_mean = c.n1 > 0 && static_cast<double>(c.n1_ones) <= 1.5 * inst.mu * static_cast<double>(c.n1);
  return out;
}

/// Independent replicates of the instance, replicate r seeded with derive_seed(seed, r).
inline std::vector<ReplicateOutcome> lower_bound_experiment(std::uint64_t n, std::size_t replicates,
                                                            std::uint64_t seed) {
  const auto inst = LowerBoundInstance::make(n);
  std::vector<ReplicateOutcome> out;
  out.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) out.push_back(lower_bound_replicate(inst, derive_seed(seed, r)));
  return out;
}

struct LowerBoundSummary {
  std::size_t replicates = 0;
  double threshold = 0.0;        ///< 2^-5 / sqrt(n)
  double kl_bound = 0.0;         ///< plugin_bound(L*, 2, 2, 0.05, n)
  double bad_event_rate = 0.0;
  double ls_large_rate = 0.0;    ///< fraction with LS regret >= threshold
  double kl_within_rate = 0.0;   ///< fraction with KL regret <= kl_bound
  bool lstar_within_bound = true;
  double ls_median = 0.0, ls_q90 = 0.0, kl_median = 0.0, kl_q90 = 0.0;
};

namespace detail {

/// Lower empirical quantile: the ceil(q m)-th smallest value.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size(), std::max<std::size_t>(k, 1)) - 1];
}

}  // namespace detail

inline LowerBoundSummary summarize_lower_bound(const LowerBoundInstance& inst,
                                               const std::vector<ReplicateOutcome>& outcomes) {
  LowerBoundSummary s;
  s.replicates = outcomes.size();
  const double nd = static_cast<double>(inst.n);
  s.threshold = std::pow(2.0, -5) / std::sqrt(nd);
  s.kl_bound = plugin_bound(optimal_risk(inst.dist), 2, 2, 0.05, nd);
  std::vector<double> ls, kl;
  for (const auto& o : outcomes) {
    s.bad_event_rate += o.bad_event();
    s.ls_large_rate += o.ls_regret >= s.threshold;
    s.kl_within_rate += o.kl_regret <= s.kl_bound;
    s.lstar_within_bound = s.lstar_within_bound && o.lstar <= inst.lstar_bound;
    ls.push_back(o.ls_regret);
    kl.push_back(o.kl_regret);
  }
  if (!outcomes.empty()) {
    const double m = static_cast<double>(outcomes.size());
    s.bad_event_rate /= m;
    s.ls_large_rate /= m;
    s.kl_within_rate /= m;
  }
  s.ls_median = detail::quantile(ls, 0.5);
  s.ls_q90 = detail::quantile(ls, 0.9);
  s.kl_median = detail::quantile(kl, 0.5);
  s.kl_q90 = detail::quantile(kl, 0.9);
  return s;
}

}  // namespace fastcb
