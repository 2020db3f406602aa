#pragma once

// Experiment orchestration: single runs, hyperparameter sweeps over
// multiclass datasets, head-to-head comparison and report emission.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fastcb/bandit_engine.hpp"
#include "fastcb/datasets.hpp"
#include "fastcb/evaluation.hpp"
#include "fastcb/format.hpp"
#include "fastcb/oracles.hpp"
#include "fastcb/random.hpp"
#include "fastcb/synthetic.hpp"

namespace fastcb {

enum class OracleKind { aggregation, glm_logistic, linear_square };

inline std::string to_string(OracleKind k) {
  switch (k) {
    case OracleKind::aggregation: return "aggregation";
    case OracleKind::glm_logistic: return "glm_logistic";
    case OracleKind::linear_square: return "linear_square";
  }
  return "?";
}

inline OracleKind parse_oracle(const std::string& s) {
  if (s == "aggregation") return OracleKind::aggregation;
  if (s == "glm_logistic") return OracleKind::glm_logistic;
  if (s == "linear_square") return OracleKind::linear_square;
  throw std::invalid_argument("unknown oracle '" + s + "'");
}

inline FeedbackMode mode_for(Algorithm a) {
  return a == Algorithm::fastcb_rewards ? FeedbackMode::rewards : FeedbackMode::losses;
}

inline GlmConfig glm_config(OracleKind k, double step) {
  GlmConfig cfg;
  cfg.step_size = step;
  cfg.link = k == OracleKind::linear_square ? Link::identity_clipped : Link::logistic;
  return cfg;
}

/// Dispatch on the algorithm with a fixed or power-law schedule.
template <BanditEnvironment Env, RegressionOracle Oracle>
RunLog run_algorithm(Algorithm alg, Env& env, Oracle& oracle, const Schedule& schedule, std::uint64_t seed,
                     const RunOptions& opts = {}) {
  switch (alg) {
    case Algorithm::fastcb: return run_fastcb(env, oracle, schedule, seed, opts);
    case Algorithm::squarecb: return run_squarecb(env, oracle, schedule, seed, opts);
    case Algorithm::fastcb_rewards: return run_fastcb_rewards(env, oracle, schedule, seed, opts);
    case Algorithm::uniform: return run_uniform(env, oracle, seed, opts);
  }
  throw std::logic_error("run_algorithm: unreachable");
}

// ---------------------------------------------------------------------------
// Single runs

/// Parses "A=4,X=10,F=16,L=100,T=10000[,seed=7]".
inline SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("synthetic spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    auto number = [&]() {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || !std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("synthetic spec: bad value for '" + key + "'");
      return v;
    };
    auto count = [&]() {
      const double v = number();
      if (v != std::floor(v)) throw std::invalid_argument("synthetic spec: '" + key + "' must be an integer");
      return static_cast<std::size_t>(v);
    };
    if (key == "A") spec.num_actions = count();
    else if (key == "X") spec.num_contexts = count();
    else if (key == "F") spec.class_size = count();
    else if (key == "L") spec.lstar_target = number();
    else if (key == "T") spec.horizon = count();
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(count());
    else throw std::invalid_argument("synthetic spec: unknown key '" + key + "'");
  }
  return spec;
}

struct RunRequest {
  Algorithm algorithm = Algorithm::fastcb;
  OracleKind oracle = OracleKind::glm_logistic;
  std::optional<double> gamma0;  ///< unset: tuned gamma on synthetic problems, 100 otherwise
  double rho = 0.0;
  double step = 0.5;
  std::optional<std::size_t> horizon;
  std::uint64_t seed = 1;
  std::string data_path;
  std::optional<SyntheticSpec> synthetic;
};

inline RunLog execute_run(const RunRequest& req, const RunOptions& opts = {}) {
  const FeedbackMode mode = mode_for(req.algorithm);
  if (req.synthetic) {
    SyntheticSpec spec = *req.synthetic;
    spec.mode = mode;
    if (req.horizon) spec.horizon = *req.horizon;
    auto problem = synthetic_realizable_env(spec);
    const std::size_t A = spec.num_actions;
    const double reg = std::log(static_cast<double>(problem.cls.size())) > 0.0
                           ? std::log(static_cast<double>(problem.cls.size()))
                           : std::log(2.0);
    const Schedule schedule = req.gamma0 ? Schedule::power_law(*req.gamma0, req.rho)
                                         : Schedule::theorem(A, problem.lstar, reg);
    if (req.oracle == OracleKind::aggregation) {
      AggregationOracle oracle(problem.cls);
      return run_algorithm(req.algorithm, problem.env, oracle, schedule, req.seed, opts);
    }
    GlmOracle oracle(spec.num_contexts, A, glm_config(req.oracle, req.step));
    return run_algorithm(req.algorithm, problem.env, oracle, schedule, req.seed, opts);
  }
  if (req.data_path.empty()) throw std::invalid_argument("run: need a dataset or a synthetic spec");
  if (req.oracle == OracleKind::aggregation)
    throw std::invalid_argument("run: the aggregation oracle needs a finite class (synthetic problems only)");
  auto ds = std::make_shared<const MulticlassDataset>(load_multiclass_csv(req.data_path));
  DatasetEnv env(ds, req.seed, req.horizon.value_or(ds->size()), mode);
  GlmOracle oracle(ds->dim, ds->num_classes, glm_config(req.oracle, req.step));
  return run_algorithm(req.algorithm, env, oracle, Schedule::power_law(req.gamma0.value_or(100.0), req.rho),
                       req.seed, opts);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Selection { per_dataset, fixed };

struct ExperimentConfig {
  std::vector<std::string> datasets;  ///< CSV paths; may also be passed separately
  std::vector<std::string> algorithms{"fastcb", "squarecb", "uniform"};
  std::vector<std::string> oracles{"glm_logistic"};
  std::vector<double> gamma0{10, 50, 100, 400, 700, 1000};
  std::vector<double> rho{0.25, 0.5};
  std::vector<double> step{0.5};
  std::size_t replicates = 5;
  std::uint64_t seed = 1;
  Selection selection = Selection::per_dataset;
  std::size_t threads = 0;  ///< 0: hardware concurrency
};

inline void validate(const ExperimentConfig& c) {
  if (c.algorithms.empty() || c.oracles.empty() || c.gamma0.empty() || c.rho.empty() || c.step.empty())
    throw std::invalid_argument("experiment config: grids must be nonempty");
  if (c.replicates == 0) throw std::invalid_argument("experiment config: need at least one replicate");
  for (const auto& a : c.algorithms) parse_algorithm(a);
  for (const auto& o : c.oracles)
    if (parse_oracle(o) == OracleKind::aggregation)
      throw std::invalid_argument("experiment config: the aggregation oracle cannot run on datasets");
  for (double g : c.gamma0)
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("experiment config: gamma0 must be positive");
  for (double r : c.rho)
    if (!std::isfinite(r)) throw std::invalid_argument("experiment config: rho must be finite");
  for (double s : c.step)
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("experiment config: step must be positive");
}

/// Flat JSON object. Scalars are accepted where a list is expected.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("experiment config: expected a JSON object");
  ExperimentConfig c;
  auto list = [](const nlohmann::json& v, auto& out) {
    using T = typename std::decay_t<decltype(out)>::value_type;
    out.clear();
    if (v.is_array())
      for (const auto& e : v) out.push_back(e.get<T>());
    else
      out.push_back(v.get<T>());
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "datasets") list(v, c.datasets);
      else if (key == "algorithms") list(v, c.algorithms);
      else if (key == "oracles") list(v, c.oracles);
      else if (key == "gamma0") list(v, c.gamma0);
      else if (key == "rho") list(v, c.rho);
      else if (key == "step") list(v, c.step);
      else if (key == "replicates") c.replicates = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "threads") c.threads = v.get<std::size_t>();
      else if (key == "selection") {
        const auto s = v.get<std::string>();
        if (s == "per_dataset") c.selection = Selection::per_dataset;
        else if (s == "fixed") c.selection = Selection::fixed;
        else throw std::invalid_argument("experiment config: selection must be per_dataset or fixed");
      } else {
        throw std::invalid_argument("experiment config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("experiment config: bad value for '" + key + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

struct Arm {
  std::string name;
  Algorithm algorithm = Algorithm::fastcb;
  OracleKind oracle = OracleKind::glm_logistic;
};

struct GridPoint {
  double gamma0 = 0.0;
  double rho = 0.0;
  double step = 0.0;
};

struct BestConfig {
  GridPoint point;
  double final_pv = 0.0;  ///< mean over replicates
  double n = 0.0;         ///< rounds pooled over replicates
};

struct PairResult {
  std::size_t dataset = 0;
  std::size_t a = 0, b = 0;  ///< arm indices, a < b
  double pv_a = 0.0, pv_b = 0.0, n = 0.0, z = 0.0;
  ZResult result = ZResult::none;

  friend bool operator==(const PairResult&, const PairResult&) = default;
};

struct ComparisonReport {
  std::vector<std::string> datasets;
  std::vector<Arm> arms;
  std::vector<std::vector<BestConfig>> best;  ///< [dataset][arm]
  std::vector<PairResult> pairs;
  std::vector<std::vector<long>> winloss;  ///< wins of row over column minus the reverse
};

inline bool operator==(const GridPoint& x, const GridPoint& y) {
  return x.gamma0 == y.gamma0 && x.rho == y.rho && x.step == y.step;
}
inline bool operator==(const BestConfig& x, const BestConfig& y) {
  return x.point == y.point && x.final_pv == y.final_pv && x.n == y.n;
}
inline bool operator==(const Arm& x, const Arm& y) {
  return x.name == y.name && x.algorithm == y.algorithm && x.oracle == y.oracle;
}
inline bool operator==(const ComparisonReport& x, const ComparisonReport& y) {
  return x.datasets == y.datasets && x.arms == y.arms && x.best == y.best && x.pairs == y.pairs &&
         x.winloss == y.winloss;
}

/// Replicate-averaged PV curve of one (dataset, arm) at its selected grid point.
struct CurveSet {
  std::size_t dataset = 0;
  std::size_t arm = 0;
  std::vector<double> mean;
  std::vector<double> half_width;  ///< one-sided 5% Z band
  std::vector<RunLog> runs;
};

struct SweepResult {
  ComparisonReport report;
  std::vector<CurveSet> curves;
};

inline std::vector<Arm> arms_of(const ExperimentConfig& c) {
  std::vector<Arm> arms;
  for (const auto& a : c.algorithms) {
    const Algorithm alg = parse_algorithm(a);
    if (alg == Algorithm::uniform) {
      if (std::none_of(arms.begin(), arms.end(), [](const Arm& x) { return x.algorithm == Algorithm::uniform; }))
        arms.push_back({"uniform", alg, OracleKind::glm_logistic});
      continue;
    }
    for (const auto& o : c.oracles) arms.push_back({a + "+" + o, alg, parse_oracle(o)});
  }
  return arms;
}

inline std::vector<GridPoint> grid_of(const ExperimentConfig& c, const Arm& arm) {
  if (arm.algorithm == Algorithm::uniform) return {GridPoint{}};
  std::vector<GridPoint> g;
  for (double g0 : c.gamma0)
    for (double r : c.rho)
      for (double s : c.step) g.push_back({g0, r, s});
  return g;
}

/// Seed shared by every arm on a given (dataset, replicate), so arms see the
/// same permutation.
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t dataset, std::size_t replicate) {
  return derive_seed(derive_seed(base, 0x44415441 + dataset), replicate);
}

inline RunLog run_on_dataset(const Arm& arm, const GridPoint& point, std::shared_ptr<const MulticlassDataset> ds,
                             std::uint64_t seed) {
  const FeedbackMode mode = mode_for(arm.algorithm);
  auto env = bandit_env_from_dataset(ds, seed, mode);
  GlmOracle oracle(ds->dim, ds->num_classes,
                   glm_config(arm.oracle, arm.algorithm == Algorithm::uniform ? 0.5 : point.step));
  const Schedule schedule =
      arm.algorithm == Algorithm::uniform ? Schedule::fixed(1.0) : Schedule::power_law(point.gamma0, point.rho);
  RunOptions opts;
  opts.vector_log_limit = 0;
  return run_algorithm(arm.algorithm, env, oracle, schedule, derive_seed(seed, 0x52554E), opts);
}

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

inline SweepResult sweep(const ExperimentConfig& config,
                         const std::vector<std::shared_ptr<const MulticlassDataset>>& datasets) {
  validate(config);
  const std::vector<Arm> arms = arms_of(config);
  const std::size_t D = datasets.size(), K = arms.size(), R = config.replicates;

  struct Job {
    std::size_t d, k, g, r;
  };
  std::vector<std::vector<GridPoint>> grids;
  for (const auto& arm : arms) grids.push_back(grid_of(config, arm));
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t g = 0; g < grids[k].size(); ++g)
        for (std::size_t r = 0; r < R; ++r) jobs.push_back({d, k, g, r});

  std::vector<double> finals(jobs.size());
  detail::parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    const Job& j = jobs[i];
    const RunLog log = run_on_dataset(arms[j.k], grids[j.k][j.g], datasets[j.d],
                                      replicate_seed(config.seed, j.d, j.r));
    finals[i] = progressive_validation(log).back();
  });

  // mean_pv[d][k][g], summed in job order so the result is thread-count independent
  std::vector<std::vector<std::vector<double>>> mean_pv(D, std::vector<std::vector<double>>(K));
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t k = 0; k < K; ++k) mean_pv[d][k].assign(grids[k].size(), 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) mean_pv[jobs[i].d][jobs[i].k][jobs[i].g] += finals[i];
  for (auto& per_d : mean_pv)
    for (auto& per_k : per_d)
      for (double& v : per_k) v /= static_cast<double>(R);

  ComparisonReport report;
  report.arms = arms;
  for (const auto& ds : datasets) report.datasets.push_back(ds->name);
  report.best.assign(D, std::vector<BestConfig>(K));
  std::vector<std::vector<std::size_t>> chosen(D, std::vector<std::size_t>(K, 0));

  for (std::size_t k = 0; k < K; ++k) {
    const auto& grid = grids[k];
    if (config.selection == Selection::fixed && D > 0) {
      // One (gamma0, rho) for all datasets; only the step size adapts per dataset.
      double best_score = kInfinity;
      std::size_t best_g = 0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (g > 0 && grid[g].gamma0 == grid[g - 1].gamma0 && grid[g].rho == grid[g - 1].rho) continue;
        double score = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          double m = kInfinity;
          for (std::size_t h = g; h < grid.size() && grid[h].gamma0 == grid[g].gamma0 && grid[h].rho == grid[g].rho; ++h)
            m = std::min(m, mean_pv[d][k][h]);
          score += m;
        }
        if (score < best_score) {
          best_score = score;
          best_g = g;
        }
      }
      for (std::size_t d = 0; d < D; ++d) {
        std::size_t pick = best_g;
        for (std::size_t h = best_g;
             h < grid.size() && grid[h].gamma0 == grid[best_g].gamma0 && grid[h].rho == grid[best_g].rho; ++h)
          if (mean_pv[d][k][h] < mean_pv[d][k][pick]) pick = h;
        chosen[d][k] = pick;
      }
    } else {
      for (std::size_t d = 0; d < D; ++d) {
        std::size_t pick = 0;
        for (std::size_t g = 1; g < grid.size(); ++g)
          if (mean_pv[d][k][g] < mean_pv[d][k][pick]) pick = g;
        chosen[d][k] = pick;
      }
    }
    for (std::size_t d = 0; d < D; ++d)
      report.best[d][k] = {grid[chosen[d][k]], mean_pv[d][k][chosen[d][k]],
                           static_cast<double>(datasets[d]->size() * R)};
  }

  report.winloss.assign(K, std::vector<long>(K, 0));
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = a + 1; b < K; ++b) {
        PairResult p;
        p.dataset = d;
        p.a = a;
        p.b = b;
        p.pv_a = report.best[d][a].final_pv;
        p.pv_b = report.best[d][b].final_pv;
        p.n = report.best[d][a].n;
        p.z = z_statistic(p.pv_a, p.pv_b, p.n);
        p.result = ztest_significant(p.pv_a, p.pv_b, p.n);
        if (p.result == ZResult::a_beats_b) {
          ++report.winloss[a][b];
          --report.winloss[b][a];
        } else if (p.result == ZResult::b_beats_a) {
          ++report.winloss[b][a];
          --report.winloss[a][b];
        }
        report.pairs.push_back(p);
      }

  // Second pass: re-run the selected configurations to keep their logs.
  SweepResult result;
  result.report = std::move(report);
  result.curves.resize(D * K);
  std::vector<RunLog> logs(D * K * R);
  detail::parallel_for(logs.size(), config.threads, [&](std::size_t i) {
    const std::size_t r = i % R, k = (i / R) % K, d = i / (R * K);
    logs[i] = run_on_dataset(arms[k], grids[k][chosen[d][k]], datasets[d], replicate_seed(config.seed, d, r));
  });
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t k = 0; k < K; ++k) {
      CurveSet& c = result.curves[d * K + k];
      c.dataset = d;
      c.arm = k;
      const std::size_t T = datasets[d]->size();
      c.mean.assign(T, 0.0);
      for (std::size_t r = 0; r < R; ++r) {
        RunLog& log = logs[(d * K + k) * R + r];
        const auto pv = progressive_validation(log);
        for (std::size_t t = 0; t < T; ++t) c.mean[t] += pv[t];
        c.runs.push_back(std::move(log));
      }
      c.half_width.resize(T);
      for (std::size_t t = 0; t < T; ++t) {
        c.mean[t] /= static_cast<double>(R);
        const double pooled = static_cast<double>((t + 1) * R);
        c.half_width[t] = kZ95 * std::sqrt(c.mean[t] * (1.0 - c.mean[t]) / pooled);
      }
    }
  return result;
}

// ---------------------------------------------------------------------------
// Report emission

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

inline std::string file_safe(std::string s) {
  for (char& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  return s;
}

}  // namespace detail

/// Writes summary.csv (head-to-head table), winloss.csv, best_configs.csv,
/// curves/<dataset>__<arm>.csv and runs/<dataset>__<arm>__r<k>.csv.
inline void emit_report(const ComparisonReport& report, const std::vector<CurveSet>& curves,
                        const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  {
    const auto p = out_dir / "summary.csv";
    auto out = detail::open_for_write(p);
    out << "dataset,arm_a,arm_b,pv_a,pv_b,n,z,winner\n";
    for (const auto& r : report.pairs) {
      const char* winner = r.result == ZResult::a_beats_b ? "a" : r.result == ZResult::b_beats_a ? "b" : "none";
      out << report.datasets[r.dataset] << ',' << report.arms[r.a].name << ',' << report.arms[r.b].name << ','
          << format_double(r.pv_a) << ',' << format_double(r.pv_b) << ',' << format_double(r.n) << ','
          << format_double(r.z) << ',' << winner << '\n';
    }
    detail::finish(out, p);
  }
  {
    const auto p = out_dir / "winloss.csv";
    auto out = detail::open_for_write(p);
    out << "arm";
    for (const auto& a : report.arms) out << ',' << a.name;
    out << '\n';
    for (std::size_t i = 0; i < report.arms.size(); ++i) {
      out << report.arms[i].name;
      for (long v : report.winloss[i]) out << ',' << v;
      out << '\n';
    }
    detail::finish(out, p);
  }
  {
    const auto p = out_dir / "best_configs.csv";
    auto out = detail::open_for_write(p);
    out << "dataset,arm,gamma0,rho,step,final_pv\n";
    for (std::size_t d = 0; d < report.datasets.size(); ++d)
      for (std::size_t k = 0; k < report.arms.size(); ++k) {
        const auto& b = report.best[d][k];
        out << report.datasets[d] << ',' << report.arms[k].name << ',' << format_double(b.point.gamma0) << ','
            << format_double(b.point.rho) << ',' << format_double(b.point.step) << ','
            << format_double(b.final_pv) << '\n';
      }
    detail::finish(out, p);
  }
  if (curves.empty()) return;

  fs::create_directories(out_dir / "curves", ec);
  if (ec) throw std::runtime_error("cannot create '" + (out_dir / "curves").string() + "': " + ec.message());
  fs::create_directories(out_dir / "runs", ec);
  if (ec) throw std::runtime_error("cannot create '" + (out_dir / "runs").string() + "': " + ec.message());
  for (const auto& c : curves) {
    const std::string stem =
        detail::file_safe(report.datasets[c.dataset]) + "__" + detail::file_safe(report.arms[c.arm].name);
    const auto p = out_dir / "curves" / (stem + ".csv");
    auto out = detail::open_for_write(p);
    out << "t,pv_mean,band_lo,band_hi\n";
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      out << (t + 1) << ',' << format_double(c.mean[t]) << ','
          << format_double(std::max(0.0, c.mean[t] - c.half_width[t])) << ','
          << format_double(std::min(1.0, c.mean[t] + c.half_width[t])) << '\n';
    detail::finish(out, p);
    for (std::size_t r = 0; r < c.runs.size(); ++r) {
      const auto rp = out_dir / "runs" / (stem + "__r" + std::to_string(r) + ".csv");
      auto rout = detail::open_for_write(rp);
      write_rounds_csv(c.runs[r], rout);
      detail::finish(rout, rp);
    }
  }
}

}  // namespace fastcb
