#pragma once

// Progressive validation and the approximate Z-test used to compare two
// final PV losses.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastcb/bandit_engine.hpp"

namespace fastcb {

/// Standard normal quantile at 0.95.
inline constexpr double kZ95 = 1.6448536269514727;

/// Prefix averages of the per-round loss. Reward runs are reported as
/// 1 - reward so that lower is better in both modes.
inline std::vector<double> progressive_validation(const RunLog& log) {
  if (log.rounds.empty()) throw std::invalid_argument("progressive_validation: empty log");
  std::vector<double> pv;
  pv.reserve(log.rounds.size());
  double sum = 0.0;
  for (const auto& r : log.rounds) {
    sum += log.mode == FeedbackMode::rewards ? 1.0 - r.outcome : r.outcome;
    pv.push_back(sum / static_cast<double>(r.t));
  }
  return pv;
}

enum class ZResult { a_beats_b, b_beats_a, none };

inline std::string to_string(ZResult r) {
  switch (r) {
    case ZResult::a_beats_b: return "a";
    case ZResult::b_beats_a: return "b";
    case ZResult::none: return "none";
  }
  return "?";
}

/// z = (pb - pa) / sqrt(pa(1-pa)/n + pb(1-pb)/n). Positive means a has the
/// lower loss. A zero denominator gives 0 when pa == pb and +-inf otherwise.
inline double z_statistic(double pa, double pb, double n) {
  if (!(pa >= 0.0 && pa <= 1.0) || !(pb >= 0.0 && pb <= 1.0))
    throw std::invalid_argument("z-test: losses must lie in [0, 1]");
  if (!(n >= 1.0)) throw std::invalid_argument("z-test: need n >= 1");
  const double diff = pb - pa;
  const double var = (pa * (1.0 - pa) + pb * (1.0 - pb)) / n;
  if (var == 0.0) return diff == 0.0 ? 0.0 : std::copysign(kInfinity, diff);
  return diff / std::sqrt(var);
}

/// Lower loss wins when |z| exceeds the one-sided 5% quantile.
inline ZResult ztest_significant(double pa, double pb, double n) {
  const double z = z_statistic(pa, pb, n);
  if (z > kZ95) return ZResult::a_beats_b;
  if (z < -kZ95) return ZResult::b_beats_a;
  return ZResult::none;
}

}  // namespace fastcb
