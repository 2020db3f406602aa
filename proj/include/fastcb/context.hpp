#pragma once

#include <cstddef>
#include <span>

namespace fastcb {

/// What the learner sees before acting: a discrete id (used by tabular
/// classes) and a dense feature vector (used by linear/GLM oracles). Either
/// part may be unused by a given oracle. Features are borrowed from the
/// environment and stay valid for the round.
struct Context {
  std::size_t id = 0;
  std::span<const double> features{};
};

/// One round of bandit feedback as seen by an oracle.
struct Example {
  std::size_t context = 0;
  std::size_t action = 0;
  double outcome = 0.0;
};

}  // namespace fastcb
