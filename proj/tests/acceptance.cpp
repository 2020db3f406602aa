// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fastcb/experiment.hpp"
#include "fastcb/plugin_learning.hpp"
#include "fastcb/verify.hpp"

using namespace fastcb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string summary_of(const CheckResult& r) {
  std::ostringstream os;
  os << r.name << ": " << r.evaluated << "/" << r.samples << " evaluated, " << r.violations
     << " violations, min slack " << format_double(r.min_slack) << ", max lhs/rhs " << format_double(r.max_ratio)
     << ", near-tight " << r.near_tight;
  return os.str();
}

Outcome divergence_suite() {
  CheckOptions o;
  o.samples = 1'000'000;
  Outcome out{true, ""};
  for (auto fn : {check_refined_pinsker, check_hellinger_tri, check_multinomial_hellinger, check_pinsker_square,
                  check_exp_concavity}) {
    const auto r = fn(o);
    out.pass = out.pass && r.passed() && r.samples == o.samples;
    out.detail += "\n    " + summary_of(r);
    for (const auto& w : r.witnesses)
      if (!r.passed()) out.detail += "\n      " + w;
  }
  return out;
}

Outcome per_round_suite() {
  CheckOptions o;
  o.samples = 1'000'000;
  o.max_witnesses = 3;
  Outcome out{true, ""};
  for (auto fn : {check_per_round_losses, check_per_round_rewards}) {
    const auto r = fn(o);
    out.pass = out.pass && r.passed();
    out.detail += "\n    " + summary_of(r);
    for (const auto& w : r.witnesses) out.detail += "\n      " + w;
  }
  return out;
}

Outcome aggregation_suite() {
  CheckOptions o;
  o.samples = 1000;
  const auto r = check_aggregation_regret(o, 1000, 64);
  return {r.passed() && r.evaluated == 1000, "\n    " + summary_of(r)};
}

struct LowerBoundRun {
  LowerBoundInstance inst;
  std::vector<ReplicateOutcome> outcomes;
  LowerBoundSummary summary;
  double seconds = 0.0;
};

const LowerBoundRun& lower_bound_run() {
  static const LowerBoundRun run = [] {
    LowerBoundRun r;
    const auto t0 = std::chrono::steady_clock::now();
    r.inst = LowerBoundInstance::make(200'000'000);
    r.outcomes = lower_bound_experiment(r.inst.n, 500, 2024);
    r.summary = summarize_lower_bound(r.inst, r.outcomes);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

Outcome lower_bound_ls() {
  const auto& r = lower_bound_run();
  const auto& s = r.summary;
  std::ostringstream os;
  os << "freq{LS regret >= 2^-5/sqrt(n)} = " << format_double(s.ls_large_rate) << " (need >= 0.08), bad event "
     << format_double(s.bad_event_rate) << ", L* <= 2^8/n on all replicates: " << (s.lstar_within_bound ? "yes" : "no")
     << ", " << format_double(r.seconds) << " s";
  return {s.ls_large_rate >= 0.08 && s.lstar_within_bound && r.seconds < 60.0, os.str()};
}

Outcome lower_bound_kl() {
  const auto& s = lower_bound_run().summary;
  std::ostringstream os;
  os << "freq{KL regret <= " << format_double(s.kl_bound) << "} = " << format_double(s.kl_within_rate)
     << " (need >= 0.95), KL regret median " << format_double(s.kl_median);
  return {s.kl_within_rate >= 0.95, os.str()};
}

Outcome lemma_suite() {
  CheckOptions o;
  o.samples = 100'000;
  const auto a = check_regret_decomposition(o);
  const auto b = check_policy_mass(o);
  return {a.passed() && b.passed(), "\n    " + summary_of(a) + "\n    " + summary_of(b)};
}

constexpr std::size_t kT = 100'000;
constexpr std::size_t kSeeds = 50;

struct EndToEnd {
  double mean_realized = 0.0;
  double mean_cond = 0.0;
  double lstar = 0.0;
  std::size_t checked = 0, per_round_violations = 0, tri_kl_violations = 0;
};

EndToEnd end_to_end(double lstar_target) {
  EndToEnd e;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    SyntheticSpec spec;
    spec.num_actions = 4;
    spec.num_contexts = 10;
    spec.class_size = 16;
    spec.lstar_target = lstar_target;
    spec.horizon = kT;
    spec.seed = 1000 + s;
    auto prob = synthetic_realizable_env(spec);
    AggregationOracle oracle(prob.cls);
    RunOptions opts;
    opts.vector_log_limit = 0;
    const auto log = run_fastcb(prob.env, oracle, Schedule::theorem(4, prob.lstar, std::log(16.0)), 7 + s, opts);
    e.mean_realized += log.realized_regret() / kSeeds;
    e.mean_cond += log.cond_regret() / kSeeds;
    e.lstar = prob.lstar;
    e.checked += log.per_round_checked;
    e.per_round_violations += log.per_round_violations;
    e.tri_kl_violations += log.tri_kl_violations;
  }
  return e;
}

Outcome fastcb_end_to_end() {
  const auto e = end_to_end(1000.0);
  const double bound = theorem_bound(4, e.lstar, std::log(16.0));
  std::ostringstream os;
  os << "L* = " << format_double(e.lstar) << ", mean realized regret " << format_double(e.mean_realized)
     << " <= bound " << format_double(bound) << "; per-round checks " << e.checked << " with "
     << e.per_round_violations << " violations; tri > 2 kl on " << e.tri_kl_violations << " rounds";
  return {e.mean_realized <= bound && e.checked == kT * kSeeds && e.per_round_violations == 0 &&
              e.tri_kl_violations == 0,
          os.str()};
}

Outcome first_order_scaling() {
  const double T = static_cast<double>(kT);
  const std::vector<double> targets{0.0, std::pow(T, 0.25), std::pow(T, 0.5), std::pow(T, 0.75)};
  std::vector<double> regret;
  std::ostringstream os;
  for (double l : targets) {
    const auto e = end_to_end(l);
    regret.push_back(e.mean_cond);
    os << "L* " << format_double(std::round(l * 100) / 100) << " -> " << format_double(e.mean_cond) << "; ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < regret.size(); ++i) monotone = monotone && regret[i] >= regret[i - 1];
  const double free_term = 600.0 * 4 * std::log(16.0);
  os << "L*-free term " << format_double(free_term);
  return {monotone && regret[0] < free_term, os.str()};
}

std::string slurp_tree(const fs::path& dir) {
  std::ostringstream all;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    all << fs::relative(f, dir).string() << '\n' << in.rdbuf();
  }
  return all.str();
}

Outcome bake_off() {
  const std::vector<std::string> names{"iris", "wine", "breast_cancer", "digits"};
  std::vector<std::shared_ptr<const MulticlassDataset>> data;
  for (const auto& n : names)
    data.push_back(std::make_shared<const MulticlassDataset>(
        load_multiclass_csv(std::string(FASTCB_DATA_DIR) + "/" + n + ".csv")));
  ExperimentConfig c;
  c.algorithms = {"fastcb", "squarecb", "uniform"};
  c.oracles = {"glm_logistic"};
  c.replicates = 5;
  c.seed = 17;

  const auto root = fs::temp_directory_path() / "fastcb_acceptance";
  fs::remove_all(root);
  const auto first = sweep(c, data);
  emit_report(first.report, first.curves, root / "a");
  const auto second = sweep(c, data);
  emit_report(second.report, second.curves, root / "b");
  const bool deterministic = first.report == second.report && slurp_tree(root / "a") == slurp_tree(root / "b");

  const auto& rep = first.report;
  std::size_t fastcb = rep.arms.size(), uniform = rep.arms.size();
  for (std::size_t k = 0; k < rep.arms.size(); ++k) {
    if (rep.arms[k].name == "fastcb+glm_logistic") fastcb = k;
    if (rep.arms[k].name == "uniform") uniform = k;
  }
  bool antisymmetric = true;
  for (std::size_t i = 0; i < rep.arms.size(); ++i)
    for (std::size_t j = 0; j < rep.arms.size(); ++j)
      antisymmetric = antisymmetric && rep.winloss[i][j] == -rep.winloss[j][i];

  bool beats = true;
  std::ostringstream os;
  for (const auto& p : rep.pairs) {
    if (!((p.a == fastcb && p.b == uniform) || (p.a == uniform && p.b == fastcb))) continue;
    const bool fastcb_wins = (p.a == fastcb) ? p.result == ZResult::a_beats_b : p.result == ZResult::b_beats_a;
    beats = beats && fastcb_wins;
    const double pv_f = p.a == fastcb ? p.pv_a : p.pv_b, pv_u = p.a == fastcb ? p.pv_b : p.pv_a;
    os << "\n    " << rep.datasets[p.dataset] << ": fastcb " << format_double(pv_f) << " vs uniform "
       << format_double(pv_u) << " (|z| " << format_double(std::abs(p.z)) << ")";
  }
  std::size_t curves = 0;
  for (const auto& e : fs::directory_iterator(root / "a" / "curves")) curves += e.is_regular_file();
  const bool curves_ok = curves == data.size() * rep.arms.size();
  os << "\n    curves " << curves << ", antisymmetric " << (antisymmetric ? "yes" : "no") << ", deterministic "
     << (deterministic ? "yes" : "no");
  return {fastcb < rep.arms.size() && beats && antisymmetric && deterministic && curves_ok, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"divergence inequalities, 10^6 draws each", divergence_suite},
      {"per-round inequalities, 10^6 draws each", per_round_suite},
      {"aggregation oracle regret <= log|F|", aggregation_suite},
      {"least-squares plug-in failure at n = 2e8", lower_bound_ls},
      {"log-loss plug-in within its bound", lower_bound_kl},
      {"regret decomposition and policy mass lemmas", lemma_suite},
      {"FastCB end-to-end regret bound", fastcb_end_to_end},
      {"first-order scaling in L*", first_order_scaling},
      {"dataset bake-off", bake_off},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ["
              << format_double(std::round(secs * 10) / 10) << " s] " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
