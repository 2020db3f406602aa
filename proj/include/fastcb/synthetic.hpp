#pragma once

// Synthetic realizable environments with a controllable optimal loss.
//
// In every context the optimal action has mean loss m = L*_target / T and
// the other actions sit a gap in [0.2, 0.5] above it, drawn independently of
// m so that problems with different targets differ only in m, and
// sum_t E[min_a f*(x_t, a)] = L*_target exactly. The finite class contains
// f* plus members that agree with f* on a random subset of contexts and are
// arbitrary elsewhere, which makes them hard to tell apart from f* early on.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fastcb/bandit_engine.hpp"
#include "fastcb/oracles.hpp"
#include "fastcb/random.hpp"

namespace fastcb {

struct SyntheticSpec {
  std::size_t num_actions = 4;
  std::size_t num_contexts = 10;
  std::size_t class_size = 16;
  double lstar_target = 0.0;  ///< expected optimal cumulative loss (or reward in reward mode)
  std::size_t horizon = 1000;
  std::uint64_t seed = 1;
  FeedbackMode mode = FeedbackMode::losses;
};

/// Contexts drawn uniformly; outcomes Bernoulli(f*(x, a)) independently per action.
class SyntheticEnv {
 public:
  SyntheticEnv(TabularFunction truth, std::size_t horizon, FeedbackMode mode)
      : truth_(std::move(truth)), horizon_(horizon), mode_(mode), one_hot_(truth_.num_contexts() * truth_.num_contexts(), 0.0) {
    for (std::size_t x = 0; x < truth_.num_contexts(); ++x) one_hot_[x * truth_.num_contexts() + x] = 1.0;
  }

  std::size_t num_actions() const noexcept { return truth_.num_actions(); }
  std::size_t num_contexts() const noexcept { return truth_.num_contexts(); }
  std::size_t horizon() const noexcept { return horizon_; }
  FeedbackMode mode() const noexcept { return mode_; }
  const TabularFunction& truth() const noexcept { return truth_; }

  void next(std::size_t, Rng& rng, Round& round) const {
    const std::size_t X = truth_.num_contexts();
    const std::size_t x = uniform_index(rng, X);
    round.context = Context{x, std::span<const double>(one_hot_).subspan(x * X, X)};
    const auto row = truth_.row(x);
    round.mean.assign(row.begin(), row.end());
    round.outcomes.resize(row.size());
    for (std::size_t a = 0; a < row.size(); ++a) round.outcomes[a] = bernoulli(rng, row[a]) ? 1.0 : 0.0;
  }

 private:
  TabularFunction truth_;
  std::size_t horizon_;
  FeedbackMode mode_;
  std::vector<double> one_hot_;
};

struct SyntheticProblem {
  SyntheticEnv env;
  FiniteClass cls;
  std::size_t fstar_index = 0;
  double lstar = 0.0;  ///< T * m, the exact expected optimal cumulative loss (reward)
};

inline SyntheticProblem synthetic_realizable_env(const SyntheticSpec& spec) {
  if (spec.num_actions < 2 || spec.num_contexts < 1 || spec.class_size < 1 || spec.horizon < 1)
    throw std::invalid_argument("synthetic_realizable_env: need A >= 2, |X| >= 1, |F| >= 1, T >= 1");
  const double T = static_cast<double>(spec.horizon);
  const double m = spec.lstar_target / T;
  const bool rewards = spec.mode == FeedbackMode::rewards;
  if (!(m >= 0.0) || m > (rewards ? 1.0 : 0.5))
    throw std::invalid_argument("synthetic_realizable_env: infeasible optimal-loss target");

  Rng rng(derive_seed(spec.seed, 0x53594E));
  const std::size_t X = spec.num_contexts, A = spec.num_actions;
  std::vector<double> truth(X * A);
  for (std::size_t x = 0; x < X; ++x) {
    const std::size_t best = uniform_index(rng, A);
    for (std::size_t a = 0; a < A; ++a) {
      double& v = truth[x * A + a];
      if (a == best)
        v = m;
      else
        v = rewards ? m * uniform(rng, 0.0, 0.75) : m + uniform(rng, 0.2, 0.5);
    }
  }

  const std::size_t star = uniform_index(rng, spec.class_size);
  std::vector<TabularFunction> members;
  for (std::size_t k = 0; k < spec.class_size; ++k) {
    std::vector<double> v = truth;
    if (k != star) {
      bool changed = false;
      for (std::size_t x = 0; x < X; ++x) {
        if (X > 1 && !bernoulli(rng, 0.5)) continue;
        for (std::size_t a = 0; a < A; ++a) v[x * A + a] = uniform(rng, 0.01, 0.99);
        changed = true;
      }
      if (!changed) {
        const std::size_t x = uniform_index(rng, X);
        for (std::size_t a = 0; a < A; ++a) v[x * A + a] = uniform(rng, 0.01, 0.99);
      }
    }
    members.emplace_back(X, A, std::move(v));
  }

  TabularFunction fstar(X, A, std::move(truth));
  return SyntheticProblem{SyntheticEnv(std::move(fstar), spec.horizon, spec.mode),
                          FiniteClass(std::move(members)), star, m * T};
}

}  // namespace fastcb
