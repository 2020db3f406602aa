#pragma once

// Online regression oracles.
//
// Every oracle answers predict(context, action) -> [0,1] without touching its
// state and learns from update(context, action, outcome), one example per
// round. Three instantiations:
//
//   AggregationOracle  exponential weights (eta = 1) over a finite class of
//                      tabular functions, predicting with the posterior mean.
//                      Log loss is 1-exp-concave on [0,1], so the mixture
//                      prediction has log-loss regret at most log|F|.
//   GlmOracle          online logistic regression (log loss) or a linear
//                      square-loss learner with clipped predictions, both
//                      trained by per-coordinate AdaGrad.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastcb/context.hpp"
#include "fastcb/divergences.hpp"

namespace fastcb {

template <class O>
concept RegressionOracle = requires(O& o, const O& co, const Context& c, std::size_t a, double y) {
  { co.predict(c, a) } -> std::convertible_to<double>;
  o.update(c, a, y);
  { co.num_actions() } -> std::convertible_to<std::size_t>;
};

/// A function (context id, action) -> [0,1] stored as a dense table.
class TabularFunction {
 public:
  TabularFunction() = default;

  TabularFunction(std::size_t num_contexts, std::size_t num_actions, std::vector<double> values)
      : contexts_(num_contexts), actions_(num_actions), values_(std::move(values)) {
    if (contexts_ == 0 || actions_ == 0)
      throw std::invalid_argument("TabularFunction: empty shape");
    if (values_.size() != contexts_ * actions_)
      throw std::invalid_argument("TabularFunction: value count does not match shape");
    for (double v : values_) detail::require_probability(v, "TabularFunction");
  }

  /// Same value everywhere in a single context, one entry per action.
  static TabularFunction constant(std::vector<double> per_action) {
    const std::size_t a = per_action.size();
    return TabularFunction(1, a, std::move(per_action));
  }

  double operator()(std::size_t context, std::size_t action) const {
    return values_[context * actions_ + action];
  }

  std::span<const double> row(std::size_t context) const {
    return std::span<const double>(values_).subspan(context * actions_, actions_);
  }

  std::size_t num_contexts() const noexcept { return contexts_; }
  std::size_t num_actions() const noexcept { return actions_; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const TabularFunction&, const TabularFunction&) = default;

 private:
  std::size_t contexts_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> values_;
};

/// Finite hypothesis class; all members share one (contexts x actions) shape.
class FiniteClass {
 public:
  FiniteClass() = default;

  explicit FiniteClass(std::vector<TabularFunction> functions) : functions_(std::move(functions)) {
    if (functions_.empty()) throw std::invalid_argument("FiniteClass: empty class");
    for (const auto& f : functions_)
      if (f.num_contexts() != functions_.front().num_contexts() ||
          f.num_actions() != functions_.front().num_actions())
        throw std::invalid_argument("FiniteClass: members disagree on shape");
  }

  std::size_t size() const noexcept { return functions_.size(); }
  std::size_t num_contexts() const { return functions_.front().num_contexts(); }
  std::size_t num_actions() const { return functions_.front().num_actions(); }
  const TabularFunction& operator[](std::size_t i) const { return functions_[i]; }
  auto begin() const noexcept { return functions_.begin(); }
  auto end() const noexcept { return functions_.end(); }

 private:
  std::vector<TabularFunction> functions_;
};

/// Cumulative log losses of the learner and of each class member.
struct OracleRecord {
  double cumulative_log_loss = 0.0;
  std::vector<double> function_losses;
};

class AggregationOracle {
 public:
  explicit AggregationOracle(FiniteClass cls, std::optional<std::vector<double>> prior = std::nullopt)
      : class_(std::move(cls)), log_prior_(class_.size(), -std::log(double(class_.size()))) {
    if (prior) {
      if (prior->size() != class_.size())
        throw std::invalid_argument("AggregationOracle: prior size does not match class");
      double total = 0.0;
      for (double w : *prior) {
        if (!(w >= 0.0) || !std::isfinite(w))
          throw std::invalid_argument("AggregationOracle: prior weights must be finite and >= 0");
        total += w;
      }
      if (!(total > 0.0)) throw std::invalid_argument("AggregationOracle: prior has no mass");
      for (std::size_t i = 0; i < class_.size(); ++i)
        log_prior_[i] = (*prior)[i] > 0.0 ? std::log((*prior)[i] / total) : -kInfinity;
    }
    record_.function_losses.assign(class_.size(), 0.0);
    log_weights_ = log_prior_;
    normalize();
  }

  std::size_t num_actions() const { return class_.num_actions(); }
  const FiniteClass& function_class() const noexcept { return class_; }

  double predict(const Context& ctx, std::size_t action) const {
    check(ctx, action);
    double out = 0.0;
    for (std::size_t i = 0; i < class_.size(); ++i)
      if (weights_[i] > 0.0) out += weights_[i] * class_[i](ctx.id, action);
    return std::clamp(out, 0.0, 1.0);
  }

  void update(const Context& ctx, std::size_t action, double outcome) {
    check(ctx, action);
    detail::require_probability(outcome, "AggregationOracle::update outcome");
    record_.cumulative_log_loss += log_loss(predict(ctx, action), outcome);
    for (std::size_t i = 0; i < class_.size(); ++i) {
      const double loss = log_loss(class_[i](ctx.id, action), outcome);
      record_.function_losses[i] += loss;
      log_weights_[i] = log_prior_[i] - record_.function_losses[i];
    }
    normalize();
  }

  /// Normalized posterior weights.
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  const OracleRecord& record() const noexcept { return record_; }

 private:
  void check(const Context& ctx, std::size_t action) const {
    if (action >= class_.num_actions())
      throw std::invalid_argument("AggregationOracle: unknown action id " + std::to_string(action));
    if (ctx.id >= class_.num_contexts())
      throw std::invalid_argument("AggregationOracle: unknown context id " + std::to_string(ctx.id));
  }

  void normalize() {
    const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
    // Only reachable when every member has taken infinite loss, i.e. the
    // class is misspecified for the observed data.
    if (!std::isfinite(top))
      throw std::runtime_error("AggregationOracle: every hypothesis has been eliminated");
    weights_.resize(log_weights_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      weights_[i] = std::exp(log_weights_[i] - top);
      total += weights_[i];
    }
    for (double& w : weights_) w /= total;
  }

  FiniteClass class_;
  std::vector<double> log_prior_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  OracleRecord record_;
};

/// Sum_t log_loss(yhat_t, y_t) - min_f Sum_t log_loss(f(x_t, a_t), y_t).
/// The comparator sums are recomputed from `trace`, independent of the
/// oracle's own bookkeeping.
inline double log_loss_regret(const OracleRecord& record, const FiniteClass& cls,
                              std::span<const Example> trace) {
  if (trace.empty()) return 0.0;
  double best = kInfinity;
  for (const auto& f : cls) {
    double total = 0.0;
    for (const auto& ex : trace) total += log_loss(f(ex.context, ex.action), ex.outcome);
    best = std::min(best, total);
  }
  return record.cumulative_log_loss - best;
}

enum class Link { logistic, identity_clipped };

struct GlmConfig {
  double step_size = 0.5;
  Link link = Link::logistic;
  /// Added to the squared-gradient accumulator inside the square root.
  double accumulator_floor = 1e-8;
};

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Block one-hot feature map: block `action` holds (x, 1), all others zero.
inline std::vector<double> feature_map(std::span<const double> x, std::size_t action,
                                       std::size_t num_actions) {
  if (action >= num_actions) throw std::invalid_argument("feature_map: action out of range");
  const std::size_t block = x.size() + 1;
  std::vector<double> phi(block * num_actions, 0.0);
  std::copy(x.begin(), x.end(), phi.begin() + action * block);
  phi[action * block + x.size()] = 1.0;
  return phi;
}

/// Generalized linear oracle over the block feature map, trained online with
/// per-coordinate AdaGrad.
///
/// With the logistic link the loss minimized is log_loss(sigmoid(<w,phi>), y),
/// whose gradient is (sigmoid(<w,phi>) - y) phi. With the identity-clipped
/// link the loss is (<w,phi> - y)^2 and predictions are clamped to [0,1].
class GlmOracle {
 public:
  GlmOracle(std::size_t context_dim, std::size_t num_actions, GlmConfig config = {})
      : context_dim_(context_dim), num_actions_(num_actions), config_(config),
        weights_((context_dim + 1) * num_actions, 0.0), grad_sq_(weights_.size(), 0.0) {
    if (num_actions == 0) throw std::invalid_argument("GlmOracle: need at least one action");
    if (!(config.step_size > 0.0)) throw std::invalid_argument("GlmOracle: step size must be > 0");
    if (!(config.accumulator_floor > 0.0))
      throw std::invalid_argument("GlmOracle: accumulator floor must be > 0");
  }

  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t dimension() const noexcept { return weights_.size(); }
  const GlmConfig& config() const noexcept { return config_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> grad_sq_accum() const noexcept { return grad_sq_; }

  double predict(const Context& ctx, std::size_t action) const {
    return apply_link(score(ctx, action));
  }

  void update(const Context& ctx, std::size_t action, double outcome) {
    detail::require_probability(outcome, "GlmOracle::update outcome");
    const double g = link_gradient(score(ctx, action), outcome);
    const std::size_t base = action * (context_dim_ + 1);
    for (std::size_t j = 0; j < context_dim_; ++j) step(base + j, g * ctx.features[j]);
    step(base + context_dim_, g);
  }

  /// Raw surface on an explicit feature vector of length dimension().
  double predict_phi(std::span<const double> phi) const { return apply_link(dot(phi)); }

  void update_phi(std::span<const double> phi, double outcome) {
    detail::require_probability(outcome, "GlmOracle::update outcome");
    const double g = link_gradient(dot(phi), outcome);
    for (std::size_t j = 0; j < phi.size(); ++j) step(j, g * phi[j]);
  }

  /// Loss being minimized at the current weights (log loss or square loss).
  double loss_phi(std::span<const double> phi, double outcome) const {
    const double z = dot(phi);
    if (config_.link == Link::logistic) {
      // softplus(z) - y z, stable for large |z|
      const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      return softplus - outcome * z;
    }
    return (z - outcome) * (z - outcome);
  }

  std::vector<double> gradient_phi(std::span<const double> phi, double outcome) const {
    const double g = link_gradient(dot(phi), outcome);
    std::vector<double> out(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) out[j] = g * phi[j];
    return out;
  }

  void set_weights(std::vector<double> w) {
    if (w.size() != weights_.size()) throw std::invalid_argument("GlmOracle: weight size mismatch");
    weights_ = std::move(w);
  }

 private:
  double score(const Context& ctx, std::size_t action) const {
    if (action >= num_actions_)
      throw std::invalid_argument("GlmOracle: unknown action id " + std::to_string(action));
    if (ctx.features.size() != context_dim_)
      throw std::invalid_argument("GlmOracle: context dimension mismatch");
    const std::size_t base = action * (context_dim_ + 1);
    double z = weights_[base + context_dim_];
    for (std::size_t j = 0; j < context_dim_; ++j) z += weights_[base + j] * ctx.features[j];
    return z;
  }

  double dot(std::span<const double> phi) const {
    if (phi.size() != weights_.size()) throw std::invalid_argument("GlmOracle: feature size mismatch");
    double z = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) z += weights_[j] * phi[j];
    return z;
  }

  double apply_link(double z) const {
    return config_.link == Link::logistic ? sigmoid(z) : std::clamp(z, 0.0, 1.0);
  }

  double link_gradient(double z, double y) const {
    return config_.link == Link::logistic ? sigmoid(z) - y : 2.0 * (z - y);
  }

  void step(std::size_t j, double g) {
    if (g == 0.0) return;
    grad_sq_[j] += g * g;
    weights_[j] -= config_.step_size * g / std::sqrt(grad_sq_[j] + config_.accumulator_floor);
  }

  std::size_t context_dim_;
  std::size_t num_actions_;
  GlmConfig config_;
  std::vector<double> weights_;
  std::vector<double> grad_sq_;
};

/// Prediction of a square-loss GLM: <w, phi(x, a)> clamped to [0,1].
inline double square_loss_clip(const GlmOracle& oracle, const Context& ctx, std::size_t action) {
  if (oracle.config().link != Link::identity_clipped)
    throw std::invalid_argument("square_loss_clip: oracle does not use the identity-clipped link");
  return oracle.predict(ctx, action);
}

}  // namespace fastcb
