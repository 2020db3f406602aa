#pragma once

// The online contextual-bandit loops.
//
// Each round: observe x_t, query the oracle for every action, turn the
// prediction vector into p_t with the algorithm's allocation rule, sample
// a_t ~ p_t, observe the played action's outcome only, and feed that single
// example back to the oracle. When the environment exposes its conditional
// means f*, the loop also accumulates the quantities the regret analysis is
// phrased in (conditional regret, triangular error, allocation-weighted KL)
// and checks the per-round inequality on every round where it applies.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastcb/allocation.hpp"
#include "fastcb/context.hpp"
#include "fastcb/divergences.hpp"
#include "fastcb/format.hpp"
#include "fastcb/oracles.hpp"
#include "fastcb/random.hpp"

namespace fastcb {

enum class FeedbackMode { losses, rewards };

/// One round drawn from an environment. Buffers are reused between rounds.
struct Round {
  Context context;
  std::vector<double> outcomes;  ///< full outcome vector; the learner sees one entry
  std::vector<double> mean;      ///< f*(x_t, .) when exposed, otherwise empty
};

template <class E>
concept BanditEnvironment = requires(E& e, const E& ce, std::size_t t, Rng& rng, Round& r) {
  { ce.num_actions() } -> std::convertible_to<std::size_t>;
  { ce.horizon() } -> std::convertible_to<std::size_t>;
  { ce.mode() } -> std::convertible_to<FeedbackMode>;
  e.next(t, rng, r);
};

enum class Algorithm { fastcb, squarecb, fastcb_rewards, uniform };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fastcb: return "fastcb";
    case Algorithm::squarecb: return "squarecb";
    case Algorithm::fastcb_rewards: return "fastcb_rewards";
    case Algorithm::uniform: return "uniform";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "fastcb") return Algorithm::fastcb;
  if (s == "squarecb") return Algorithm::squarecb;
  if (s == "fastcb_rewards") return Algorithm::fastcb_rewards;
  if (s == "uniform") return Algorithm::uniform;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

/// Learning-rate schedule gamma_t = gamma0 * t^rho (rho = 0 gives a fixed rate).
struct Schedule {
  double gamma0 = 100.0;
  double rho = 0.0;

  static Schedule fixed(double gamma) { return {gamma, 0.0}; }
  static Schedule power_law(double gamma0, double rho) { return {gamma0, rho}; }
  /// Fixed rate tuned to a known bound on the optimal cumulative loss.
  static Schedule theorem(std::size_t num_actions, double lstar, double reg_kl) {
    return fixed(compute_gamma(num_actions, lstar, reg_kl));
  }

  double gamma(std::size_t t) const {
    return rho == 0.0 ? gamma0 : gamma0 * std::pow(static_cast<double>(t), rho);
  }
};

inline void validate(const Schedule& s) {
  if (!(s.gamma0 > 0.0) || !std::isfinite(s.gamma0))
    throw std::invalid_argument("schedule: gamma0 must be positive");
  if (!std::isfinite(s.rho)) throw std::invalid_argument("schedule: rho must be finite");
}

struct RunOptions {
  /// Prediction and probability vectors are stored only when A * T is at most this.
  std::size_t vector_log_limit = 10'000'000;
  /// Absolute tolerance for the on-trajectory inequality checks.
  double check_tolerance = 1e-9;
};

struct RoundRecord {
  std::size_t t = 0;  ///< 1-based
  std::size_t context = 0;
  std::size_t action = 0;  ///< 0-based
  double outcome = 0.0;
  double gamma = 0.0;
  double cumulative_outcome = 0.0;
  double pv = 0.0;
  double cond_regret = 0.0;      ///< cumulative
  double realized_regret = 0.0;  ///< cumulative
  double err_tri = 0.0;          ///< cumulative
  double err_kl = 0.0;           ///< cumulative, may be +inf

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct RunLog {
  Algorithm algorithm = Algorithm::fastcb;
  FeedbackMode mode = FeedbackMode::losses;
  std::size_t num_actions = 0;
  bool has_truth = false;
  bool vectors_logged = false;
  std::vector<RoundRecord> rounds;
  std::vector<double> predictions;    ///< rounds x actions when vectors_logged
  std::vector<double> probabilities;  ///< rounds x actions when vectors_logged

  std::size_t per_round_checked = 0;
  std::size_t per_round_violations = 0;
  double per_round_min_slack = kInfinity;
  std::size_t tri_kl_violations = 0;
  std::size_t below_threshold_rounds = 0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return rounds.size(); }
  double cumulative_outcome() const { return rounds.empty() ? 0.0 : rounds.back().cumulative_outcome; }
  double pv_loss() const { return rounds.empty() ? 0.0 : rounds.back().pv; }
  double cond_regret() const { return rounds.empty() ? 0.0 : rounds.back().cond_regret; }
  double realized_regret() const { return rounds.empty() ? 0.0 : rounds.back().realized_regret; }
  double err_tri() const { return rounds.empty() ? 0.0 : rounds.back().err_tri; }
  double err_kl() const { return rounds.empty() ? 0.0 : rounds.back().err_kl; }

  std::span<const double> predictions_at(std::size_t i) const {
    return std::span<const double>(predictions).subspan(i * num_actions, num_actions);
  }
  std::span<const double> probabilities_at(std::size_t i) const {
    return std::span<const double>(probabilities).subspan(i * num_actions, num_actions);
  }

  friend bool operator==(const RunLog&, const RunLog&) = default;
};

/// Inverse-CDF draw from p; the greedy action takes whatever mass the
/// non-greedy entries leave, so rounding never produces an out-of-range index.
inline std::size_t sample_action(std::span<const double> p, std::size_t greedy, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (a == greedy) continue;
    cum += p[a];
    if (u < cum) return a;
  }
  return greedy;
}

/// The regret bound for a known L*: 40 sqrt(L* A RegKL) + 600 A RegKL.
inline double theorem_bound(std::size_t num_actions, double lstar, double reg_kl) {
  if (!(lstar >= 0.0) || !(reg_kl > 0.0))
    throw std::invalid_argument("theorem_bound: need L* >= 0 and RegKL > 0");
  const double A = static_cast<double>(num_actions);
  return 40.0 * std::sqrt(lstar * A * reg_kl) + 600.0 * A * reg_kl;
}

namespace detail {

using GammaFn = std::function<double(std::size_t t, const RunLog& so_far)>;

inline double guarantee_threshold(Algorithm alg, std::size_t num_actions) {
  const double A = static_cast<double>(num_actions);
  switch (alg) {
    case Algorithm::fastcb: return 2.0 * A;
    case Algorithm::fastcb_rewards: return 4.0 * A;
    default: return 0.0;
  }
}

template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_loop(Algorithm alg, Env& env, Oracle& oracle, const GammaFn& gamma_at, std::uint64_t seed,
                const RunOptions& opts) {
  const std::size_t A = env.num_actions();
  const std::size_t T = env.horizon();
  if (A < 2) throw std::invalid_argument("bandit run: need at least two actions");
  if (alg != Algorithm::uniform && oracle.num_actions() != A)
    throw std::invalid_argument("bandit run: oracle and environment disagree on the action count");
  const bool rewards = env.mode() == FeedbackMode::rewards;

  RunLog log;
  log.algorithm = alg;
  log.mode = env.mode();
  log.num_actions = A;
  log.vectors_logged = A * T <= opts.vector_log_limit;
  log.rounds.reserve(T);
  if (log.vectors_logged) {
    log.predictions.reserve(A * T);
    log.probabilities.reserve(A * T);
  }

  Rng env_rng(derive_seed(seed, 1));
  Rng action_rng(derive_seed(seed, 2));
  Round round;
  std::vector<double> yhat(A, 0.0);
  ActionDistribution p;
  const double threshold = guarantee_threshold(alg, A);

  RoundRecord acc;
  for (std::size_t t = 1; t <= T; ++t) {
    env.next(t, env_rng, round);
    if (round.outcomes.size() != A)
      throw std::runtime_error("bandit run: environment returned a wrong-sized outcome vector");
    const double gamma = gamma_at(t, log);

    std::size_t greedy = 0;
    switch (alg) {
      case Algorithm::uniform:
        p.assign(A, 1.0 / static_cast<double>(A));
        std::fill(yhat.begin(), yhat.end(), 0.0);
        break;
      case Algorithm::fastcb:
      case Algorithm::squarecb:
      case Algorithm::fastcb_rewards:
        for (std::size_t a = 0; a < A; ++a) yhat[a] = oracle.predict(round.context, a);
        if (alg == Algorithm::fastcb) {
          p = reweighted_igw(yhat, gamma);
          greedy = argmin_lowest(yhat);
        } else if (alg == Algorithm::squarecb) {
          p = igw(yhat, gamma);
          greedy = argmin_lowest(yhat);
        } else {
          p = reward_igw(yhat, gamma);
          greedy = argmax_lowest(yhat);
        }
        break;
    }
    if (gamma < threshold) ++log.below_threshold_rounds;

    const std::size_t action = sample_action(p, greedy, action_rng);
    const double outcome = round.outcomes[action];
    if (alg != Algorithm::uniform) oracle.update(round.context, action, outcome);

    acc.t = t;
    acc.context = round.context.id;
    acc.action = action;
    acc.outcome = outcome;
    acc.gamma = gamma;
    acc.cumulative_outcome += outcome;
    acc.pv = acc.cumulative_outcome / static_cast<double>(t);

    if (!round.mean.empty()) {
      log.has_truth = true;
      const std::span<const double> f = round.mean;
      const std::size_t star = rewards ? argmax_lowest(f) : argmin_lowest(f);
      double regret = 0.0, tri = 0.0, kl = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        regret += p[a] * (rewards ? f[star] - f[a] : f[a] - f[star]);
        if (alg == Algorithm::uniform || p[a] == 0.0) continue;
        tri += p[a] * tri_term(yhat[a], f[a]);
        kl += p[a] * binary_kl(f[a], yhat[a]);
      }
      acc.cond_regret += regret;
      acc.err_tri += tri;
      acc.err_kl += kl;
      const double realized = rewards ? round.outcomes[star] - outcome : outcome - round.outcomes[star];
      acc.realized_regret += realized;

      if (alg != Algorithm::uniform && tri > 2.0 * kl + opts.check_tolerance) ++log.tri_kl_violations;
      if (threshold > 0.0 && gamma >= threshold) {
        const InequalitySides s = rewards ? per_round_gap_rewards(p, yhat, f, gamma)
                                          : per_round_gap_losses(p, yhat, f, gamma);
        ++log.per_round_checked;
        log.per_round_min_slack = std::min(log.per_round_min_slack, s.slack());
        if (s.lhs > s.rhs + opts.check_tolerance) ++log.per_round_violations;
      }
    }

    log.rounds.push_back(acc);
    if (log.vectors_logged) {
      log.predictions.insert(log.predictions.end(), yhat.begin(), yhat.end());
      log.probabilities.insert(log.probabilities.end(), p.begin(), p.end());
    }
  }

  if (log.below_threshold_rounds > 0)
    log.warnings.push_back("learning rate below the per-round guarantee threshold on " +
                           std::to_string(log.below_threshold_rounds) + " of " + std::to_string(T) +
                           " rounds");
  return log;
}

inline void require_mode(FeedbackMode have, FeedbackMode want, const char* what) {
  if (have != want)
    throw std::invalid_argument(std::string(what) + ": environment has the wrong feedback mode");
}

}  // namespace detail

template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_fastcb(Env& env, Oracle& oracle, const Schedule& schedule, std::uint64_t seed,
                  const RunOptions& opts = {}) {
  detail::require_mode(env.mode(), FeedbackMode::losses, "run_fastcb");
  validate(schedule);
  return detail::run_loop(Algorithm::fastcb, env, oracle,
                          [&](std::size_t t, const RunLog&) { return schedule.gamma(t); }, seed, opts);
}

template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_squarecb(Env& env, Oracle& oracle, const Schedule& schedule, std::uint64_t seed,
                    const RunOptions& opts = {}) {
  detail::require_mode(env.mode(), FeedbackMode::losses, "run_squarecb");
  validate(schedule);
  return detail::run_loop(Algorithm::squarecb, env, oracle,
                          [&](std::size_t t, const RunLog&) { return schedule.gamma(t); }, seed, opts);
}

template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_fastcb_rewards(Env& env, Oracle& oracle, const Schedule& schedule, std::uint64_t seed,
                          const RunOptions& opts = {}) {
  detail::require_mode(env.mode(), FeedbackMode::rewards, "run_fastcb_rewards");
  validate(schedule);
  return detail::run_loop(Algorithm::fastcb_rewards, env, oracle,
                          [&](std::size_t t, const RunLog&) { return schedule.gamma(t); }, seed, opts);
}

/// Uniform-random exploration; the oracle is neither queried nor updated.
template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_uniform(Env& env, Oracle& oracle, std::uint64_t seed, const RunOptions& opts = {}) {
  return detail::run_loop(Algorithm::uniform, env, oracle,
                          [](std::size_t, const RunLog&) { return 1.0; }, seed, opts);
}

/// FastCB without a known L*: epochs of length 1, 2, 4, ... (the last one
/// truncated at T). At the start of each epoch gamma is re-tuned with
/// compute_gamma(A, max(1, L_hat), reg_kl_bound), L_hat being the learner's
/// cumulative loss so far. The oracle keeps its state across epochs.
template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_fastcb_doubling(Env& env, Oracle& oracle, double reg_kl_bound, std::uint64_t seed,
                           const RunOptions& opts = {}) {
  detail::require_mode(env.mode(), FeedbackMode::losses, "run_fastcb_doubling");
  if (!(reg_kl_bound > 0.0)) throw std::invalid_argument("run_fastcb_doubling: RegKL bound must be > 0");
  const std::size_t A = env.num_actions();
  std::size_t next_epoch = 1;
  double gamma = 0.0;
  auto gamma_at = [&](std::size_t t, const RunLog& so_far) {
    if (t == next_epoch) {
      gamma = compute_gamma(A, std::max(1.0, so_far.cumulative_outcome()), reg_kl_bound);
      next_epoch *= 2;
    }
    return gamma;
  };
  return detail::run_loop(Algorithm::fastcb, env, oracle, gamma_at, seed, opts);
}

/// One row per round: t, action (1-based), loss, pv_loss, gamma, cond_regret,
/// err_tri, err_kl. In reward mode the loss column holds the reward.
inline void write_rounds_csv(const RunLog& log, std::ostream& out) {
  out << "t,action,loss,pv_loss,gamma,cond_regret,err_tri,err_kl\n";
  for (const auto& r : log.rounds) {
    out << r.t << ',' << (r.action + 1) << ',' << format_double(r.outcome) << ','
        << format_double(r.pv) << ',' << format_double(r.gamma) << ','
        << format_double(r.cond_regret) << ',' << format_double(r.err_tri) << ','
        << format_double(r.err_kl) << '\n';
  }
}

/// Flat JSON object with the run's final statistics.
inline void write_summary(const RunLog& log, std::ostream& out) {
  auto field = [&](const char* key, const std::string& value, bool last = false) {
    out << "  \"" << key << "\": " << value << (last ? "\n" : ",\n");
  };
  auto num = [](double v) {
    return std::isfinite(v) ? format_double(v) : std::string("\"") + format_double(v) + "\"";
  };
  out << "{\n";
  field("algorithm", "\"" + to_string(log.algorithm) + "\"");
  field("mode", log.mode == FeedbackMode::losses ? "\"losses\"" : "\"rewards\"");
  field("rounds", std::to_string(log.size()));
  field("actions", std::to_string(log.num_actions));
  field("cumulative_loss", num(log.cumulative_outcome()));
  field("pv_loss", num(log.pv_loss()));
  field("cond_regret", num(log.cond_regret()));
  field("realized_regret", num(log.realized_regret()));
  field("err_tri", num(log.err_tri()));
  field("err_kl", num(log.err_kl()));
  field("per_round_checked", std::to_string(log.per_round_checked));
  field("per_round_violations", std::to_string(log.per_round_violations));
  field("tri_kl_violations", std::to_string(log.tri_kl_violations));
  field("below_threshold_rounds", std::to_string(log.below_threshold_rounds), true);
  out << "}\n";
}

}  // namespace fastcb
