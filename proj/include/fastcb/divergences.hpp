#pragma once

// Scalar and vector divergences between loss predictions.
//
// Triangular discrimination is defined on the whole positive orthant,
//   D(p || q) = sum_a (p_a - q_a)^2 / (p_a + q_a),
// with 0/0 terms contributing nothing. It sits between the squared error
// and the binary KL divergence: for p, q in [0,1],
//   (q - p)^2 / (q + p) <= 2 kl(p, q),
// which is what lets a log-loss regression oracle control the exploitation
// error of the reweighted allocation rule.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace fastcb {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kSimplexTolerance = 1e-12;

namespace detail {

inline void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + ": value outside [0,1]");
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

inline void require_nonnegative(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
}

inline void require_simplex(std::span<const double> v, const char* what) {
  require_nonnegative(v, what);
  double s = 0.0;
  for (double x : v) s += x;
  if (std::abs(s - 1.0) > kSimplexTolerance)
    throw std::invalid_argument(std::string(what) + ": entries do not sum to 1");
}

}  // namespace detail

/// One term of the triangular discrimination; 0 when p = q = 0.
inline double tri_term(double p, double q) noexcept {
  const double s = p + q;
  if (s <= 0.0) return 0.0;
  const double d = p - q;
  return d * d / s;
}

inline double tri_discrimination(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p.size(), q.size(), "tri_discrimination");
  detail::require_nonnegative(p, "tri_discrimination");
  detail::require_nonnegative(q, "tri_discrimination");
  double out = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) out += tri_term(p[a], q[a]);
  return out;
}

/// Triangular discrimination between Bernoulli(p) and Bernoulli(q).
inline double tri_discrimination_bernoulli(double p, double q) {
  detail::require_probability(p, "tri_discrimination_bernoulli");
  detail::require_probability(q, "tri_discrimination_bernoulli");
  return tri_term(p, q) + tri_term(1.0 - p, 1.0 - q);
}

/// kl(Bernoulli(p) || Bernoulli(q)); +infinity when q puts no mass where p does.
inline double binary_kl(double p, double q) {
  detail::require_probability(p, "binary_kl");
  detail::require_probability(q, "binary_kl");
  double out = 0.0;
  if (p > 0.0) {
    if (q == 0.0) return kInfinity;
    out += p * std::log(p / q);
  }
  if (p < 1.0) {
    if (q == 1.0) return kInfinity;
    out += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  // Cancellation can leave a tiny negative residue when p ~ q.
  return out < 0.0 ? 0.0 : out;
}

inline double hellinger_bernoulli(double p, double q) {
  detail::require_probability(p, "hellinger_bernoulli");
  detail::require_probability(q, "hellinger_bernoulli");
  const double a = std::sqrt(p) - std::sqrt(q);
  const double b = std::sqrt(1.0 - p) - std::sqrt(1.0 - q);
  return 0.5 * (a * a + b * b);
}

/// Squared Hellinger distance between two pmfs on the same support.
inline double hellinger_simplex(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p.size(), q.size(), "hellinger_simplex");
  detail::require_simplex(p, "hellinger_simplex");
  detail::require_simplex(q, "hellinger_simplex");
  double out = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double d = std::sqrt(p[a]) - std::sqrt(q[a]);
    out += d * d;
  }
  return 0.5 * out;
}

/// Logarithmic loss y log(1/yhat) + (1 - y) log(1/(1 - yhat)) for y in [0,1].
/// Terms with zero weight vanish, so a confident correct prediction costs 0
/// and a confident wrong one costs +infinity.
inline double log_loss(double yhat, double y) {
  detail::require_probability(yhat, "log_loss");
  detail::require_probability(y, "log_loss");
  double out = 0.0;
  if (y > 0.0) {
    if (yhat == 0.0) return kInfinity;
    out -= y * std::log(yhat);
  }
  if (y < 1.0) {
    if (yhat == 1.0) return kInfinity;
    out -= (1.0 - y) * std::log1p(-yhat);
  }
  return out;
}

}  // namespace fastcb
