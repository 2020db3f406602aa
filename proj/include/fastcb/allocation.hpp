#pragma once

// Allocation rules mapping a vector of predicted losses (or rewards) to a
// distribution over actions, and the per-round inequalities they satisfy.
//
// With b the greedy action and gamma the learning rate:
//
//   igw             p_a = 1 / (A + gamma (y_a - y_b))
//   reweighted_igw  p_a = y_b / (A y_b + gamma (y_a - y_b))         (b = argmin)
//   reward_igw      p_a = y_b / (A y_b + gamma (y_b - y_a))         (b = argmax)
//
// for a != b, and p_b = 1 - sum_{a != b} p_a. The reweighted rules are
// extended continuously at y_b = 0: actions tied with b get 1/A, all others
// get 0. Ties for the greedy action go to the lowest index. Every rule
// leaves p_b >= 1/A.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastcb/divergences.hpp"

namespace fastcb {

using ActionDistribution = std::vector<double>;

namespace detail {

inline void check_allocation_input(std::span<const double> y, double gamma, const char* what) {
  if (y.size() < 2) throw std::invalid_argument(std::string(what) + ": need at least two actions");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument(std::string(what) + ": learning rate must be positive and finite");
  for (double v : y) require_probability(v, what);
}

/// Fill the greedy entry with the leftover mass.
inline void close_greedy(ActionDistribution& p, std::size_t b) {
  double rest = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (a != b) rest += p[a];
  p[b] = 1.0 - rest;
}

}  // namespace detail

inline std::size_t argmin_lowest(std::span<const double> v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

inline std::size_t argmax_lowest(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline ActionDistribution igw(std::span<const double> y, double gamma) {
  detail::check_allocation_input(y, gamma, "igw");
  const std::size_t num = y.size();
  const double A = static_cast<double>(num);
  const std::size_t b = argmin_lowest(y);
  ActionDistribution p(num, 0.0);
  for (std::size_t a = 0; a < num; ++a)
    if (a != b) p[a] = 1.0 / (A + gamma * (y[a] - y[b]));
  detail::close_greedy(p, b);
  return p;
}

inline ActionDistribution reweighted_igw(std::span<const double> y, double gamma) {
  detail::check_allocation_input(y, gamma, "reweighted_igw");
  const std::size_t num = y.size();
  const double A = static_cast<double>(num);
  const std::size_t b = argmin_lowest(y);
  const double yb = y[b];
  ActionDistribution p(num, 0.0);
  for (std::size_t a = 0; a < num; ++a) {
    if (a == b) continue;
    if (yb > 0.0)
      p[a] = yb / (A * yb + gamma * (y[a] - yb));
    else
      p[a] = y[a] == 0.0 ? 1.0 / A : 0.0;
  }
  detail::close_greedy(p, b);
  return p;
}

inline ActionDistribution reward_igw(std::span<const double> y, double gamma) {
  detail::check_allocation_input(y, gamma, "reward_igw");
  const std::size_t num = y.size();
  const double A = static_cast<double>(num);
  const std::size_t b = argmax_lowest(y);
  const double yb = y[b];
  ActionDistribution p(num, 0.0);
  for (std::size_t a = 0; a < num; ++a) {
    if (a == b) continue;
    // y_b = 0 forces every entry to 0, i.e. all tied with b.
    p[a] = yb > 0.0 ? yb / (A * yb + gamma * (yb - y[a])) : 1.0 / A;
  }
  detail::close_greedy(p, b);
  return p;
}

/// Both sides of a per-round inequality; the inequality holds when lhs <= rhs.
struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const noexcept { return rhs - lhs; }
};

namespace detail {

inline void check_per_round(std::span<const double> p, std::span<const double> y,
                            std::span<const double> f, const char* what) {
  require_same_size(p.size(), y.size(), what);
  require_same_size(p.size(), f.size(), what);
  require_nonnegative(p, what);
  for (double v : y) require_probability(v, what);
  for (double v : f) require_probability(v, what);
}

inline double weighted_tri(std::span<const double> p, std::span<const double> y,
                           std::span<const double> f) {
  double out = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) out += p[a] * tri_term(y[a], f[a]);
  return out;
}

inline double weighted_sum(std::span<const double> p, std::span<const double> f) {
  double out = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) out += p[a] * f[a];
  return out;
}

}  // namespace detail

/// Loss setting, requires gamma >= 2A:
///   sum_a p_a (f_a - f_*) <= (5A/gamma) sum_a p_a f_a
///                            + 7 gamma sum_a p_a (y_a - f_a)^2 / (y_a + f_a).
inline InequalitySides per_round_gap_losses(std::span<const double> p, std::span<const double> y,
                                            std::span<const double> f, double gamma) {
  detail::check_per_round(p, y, f, "per_round_gap_losses");
  const double A = static_cast<double>(p.size());
  if (!(gamma >= 2.0 * A))
    throw std::invalid_argument("per_round_gap_losses: gamma below 2A, guarantee does not apply");
  const double best = f[argmin_lowest(f)];
  InequalitySides out;
  for (std::size_t a = 0; a < p.size(); ++a) out.lhs += p[a] * (f[a] - best);
  out.rhs = 5.0 * A / gamma * detail::weighted_sum(p, f) + 7.0 * gamma * detail::weighted_tri(p, y, f);
  return out;
}

/// Reward setting, requires gamma >= 4A:
///   sum_a p_a (f_* - f_a) <= (9A/gamma) sum_a p_a f_a
///                            + 10 gamma sum_a p_a (y_a - f_a)^2 / (y_a + f_a).
inline InequalitySides per_round_gap_rewards(std::span<const double> p, std::span<const double> y,
                                             std::span<const double> f, double gamma) {
  detail::check_per_round(p, y, f, "per_round_gap_rewards");
  const double A = static_cast<double>(p.size());
  if (!(gamma >= 4.0 * A))
    throw std::invalid_argument("per_round_gap_rewards: gamma below 4A, guarantee does not apply");
  const double best = f[argmax_lowest(f)];
  InequalitySides out;
  for (std::size_t a = 0; a < p.size(); ++a) out.lhs += p[a] * (best - f[a]);
  out.rhs = 9.0 * A / gamma * detail::weighted_sum(p, f) + 10.0 * gamma * detail::weighted_tri(p, y, f);
  return out;
}

/// Learning rate for a known bound L* on the optimal cumulative loss:
/// max(sqrt(A L* / (3 RegKL)), 10 A).
inline double compute_gamma(std::size_t num_actions, double lstar, double reg_kl) {
  if (!(reg_kl > 0.0)) throw std::invalid_argument("compute_gamma: RegKL must be > 0");
  if (!(lstar >= 0.0)) throw std::invalid_argument("compute_gamma: L* must be >= 0");
  const double A = static_cast<double>(num_actions);
  return std::max(std::sqrt(A * lstar / (3.0 * reg_kl)), 10.0 * A);
}

}  // namespace fastcb
