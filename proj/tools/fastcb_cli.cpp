// Command-line front end: single runs, dataset sweeps, inequality
// verification and the least-squares lower-bound simulation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fastcb/experiment.hpp"
#include "fastcb/plugin_learning.hpp"
#include "fastcb/verify.hpp"

namespace fs = std::filesystem;
using namespace fastcb;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create '" + p.string() + "': " + ec.message());
}

struct RunArgs {
  std::string algo = "fastcb";
  std::string oracle = "glm_logistic";
  double gamma0 = 0.0;
  double rho = 0.0;
  double step = 0.5;
  std::size_t T = 0;
  std::uint64_t seed = 1;
  std::string data;
  std::string synthetic;
  std::string out = "run_out";
};

int cmd_run(const RunArgs& a) {
  RunRequest req;
  req.algorithm = parse_algorithm(a.algo);
  req.oracle = parse_oracle(a.oracle);
  if (a.gamma0 > 0.0) req.gamma0 = a.gamma0;
  req.rho = a.rho;
  req.step = a.step;
  if (a.T > 0) req.horizon = a.T;
  req.seed = a.seed;
  req.data_path = a.data;
  if (!a.synthetic.empty()) {
    req.synthetic = parse_synthetic_spec(a.synthetic);
    req.synthetic->seed = derive_seed(a.seed, 0x454E56);
  }
  const RunLog log = execute_run(req);
  make_dir(a.out);
  {
    auto out = open_out(fs::path(a.out) / "rounds.csv");
    write_rounds_csv(log, out);
  }
  {
    auto out = open_out(fs::path(a.out) / "summary.json");
    write_summary(log, out);
  }
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "rounds " << log.size() << "  pv_loss " << format_double(log.pv_loss());
  if (log.has_truth) std::cout << "  cond_regret " << format_double(log.cond_regret());
  std::cout << '\n';
  if (log.per_round_violations > 0 || log.tri_kl_violations > 0) {
    std::cerr << "inequality violations on the trajectory: per-round " << log.per_round_violations
              << ", tri/kl " << log.tri_kl_violations << '\n';
    return 1;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& extra, const std::string& out,
              std::size_t threads) {
  ExperimentConfig config = load_experiment_config(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  std::vector<std::string> paths;
  for (const auto& d : config.datasets) paths.push_back(fs::path(d).is_absolute() ? d : (base / d).string());
  paths.insert(paths.end(), extra.begin(), extra.end());
  if (paths.empty()) throw std::invalid_argument("sweep: no datasets (config 'datasets' or --data)");
  if (threads > 0) config.threads = threads;
  std::vector<std::shared_ptr<const MulticlassDataset>> data;
  for (const auto& p : paths) data.push_back(std::make_shared<const MulticlassDataset>(load_multiclass_csv(p)));
  const SweepResult res = sweep(config, data);
  emit_report(res.report, res.curves, out);

  const auto& rep = res.report;
  for (std::size_t d = 0; d < rep.datasets.size(); ++d) {
    std::cout << rep.datasets[d] << '\n';
    for (std::size_t k = 0; k < rep.arms.size(); ++k)
      std::cout << "  " << rep.arms[k].name << "  pv " << format_double(rep.best[d][k].final_pv) << '\n';
  }
  std::cout << "win-loss (row minus column)\n";
  for (std::size_t i = 0; i < rep.arms.size(); ++i) {
    std::cout << "  " << rep.arms[i].name;
    for (long v : rep.winloss[i]) std::cout << ' ' << v;
    std::cout << '\n';
  }
  std::cout << "report written to " << out << '\n';
  return 0;
}

int cmd_verify(const std::string& checks, std::size_t samples, std::uint64_t seed, bool show_witnesses) {
  CheckOptions o;
  o.samples = samples;
  o.seed = seed;
  const std::map<std::string, std::vector<CheckResult (*)(const CheckOptions&)>> table{
      {"tri", {check_refined_pinsker, check_pinsker_square, check_hellinger_tri, check_multinomial_hellinger}},
      {"perround", {check_per_round_losses}},
      {"perround-rewards", {check_per_round_rewards}},
      {"lemma32", {check_regret_decomposition}},
      {"regret-decomposition", {check_regret_decomposition}},
      {"policymass", {check_policy_mass}},
      {"expconcave", {check_exp_concavity}},
  };
  std::vector<std::string> names;
  std::stringstream ss(checks);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) names.push_back(item);
  bool ok = true;
  auto report = [&](const CheckResult& r) {
    std::cout << (r.passed() ? "ok   " : "FAIL ") << r.name << "  samples " << r.samples << "  evaluated "
              << r.evaluated << "  violations " << r.violations << "  min_slack " << format_double(r.min_slack)
              << "  max_ratio " << format_double(r.max_ratio) << "  near_tight " << r.near_tight << '\n';
    if (show_witnesses || !r.passed())
      for (const auto& w : r.witnesses) std::cout << "    " << w << '\n';
    ok = ok && r.passed();
  };
  for (const auto& name : names) {
    if (name == "aggregation") {
      CheckOptions agg = o;
      agg.samples = std::max<std::size_t>(1, samples / 1000);
      report(check_aggregation_regret(agg));
      continue;
    }
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("verify: unknown check '" + name + "'");
    for (auto fn : it->second) report(fn(o));
  }
  return ok ? 0 : 1;
}

int cmd_lowerbound(std::uint64_t n, std::size_t replicates, std::uint64_t seed, const std::string& out) {
  const auto inst = LowerBoundInstance::make(n);
  const auto outcomes = lower_bound_experiment(n, replicates, seed);
  const auto s = summarize_lower_bound(inst, outcomes);
  make_dir(out);
  {
    auto csv = open_out(fs::path(out) / "replicates.csv");
    csv << "replicate,n1,n2,n1_ones,n2_ones,ls_pick,kl_pick,erm_pick,ls_regret,kl_regret,erm_regret,lstar,bad_event\n";
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const auto& o = outcomes[r];
      csv << r << ',' << o.counts.n1 << ',' << o.counts.n2 << ',' << o.counts.n1_ones << ',' << o.counts.n2_ones
          << ',' << o.ls_pick << ',' << o.kl_pick << ',' << o.erm_pick << ',' << format_double(o.ls_regret) << ','
          << format_double(o.kl_regret) << ',' << format_double(o.erm_regret) << ',' << format_double(o.lstar)
          << ',' << (o.bad_event() ? 1 : 0) << '\n';
    }
  }
  std::ostringstream text;
  text << "n " << n << "\nreplicates " << s.replicates << "\nlstar " << format_double(optimal_risk(inst.dist))
       << "\nlstar_bound " << format_double(inst.lstar_bound) << "\nlstar_within_bound "
       << (s.lstar_within_bound ? "yes" : "no") << "\nbad_event_rate " << format_double(s.bad_event_rate)
       << "\nls_regret_threshold " << format_double(s.threshold) << "\nls_large_rate "
       << format_double(s.ls_large_rate) << "\nls_regret_median " << format_double(s.ls_median)
       << "\nls_regret_q90 " << format_double(s.ls_q90) << "\nkl_bound " << format_double(s.kl_bound)
       << "\nkl_within_rate " << format_double(s.kl_within_rate) << "\nkl_regret_median "
       << format_double(s.kl_median) << "\nkl_regret_q90 " << format_double(s.kl_q90) << '\n';
  {
    auto f = open_out(fs::path(out) / "summary.txt");
    f << text.str();
  }
  std::cout << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandits via online log-loss regression"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "single bandit run on a dataset or a synthetic problem");
  run->add_option("--algo", ra.algo, "fastcb | squarecb | fastcb_rewards | uniform")->capture_default_str();
  run->add_option("--oracle", ra.oracle, "aggregation | glm_logistic | linear_square")->capture_default_str();
  run->add_option("--gamma0", ra.gamma0, "learning-rate scale (default: tuned on synthetic, 100 on data)");
  run->add_option("--rho", ra.rho, "learning-rate exponent, gamma_t = gamma0 t^rho")->capture_default_str();
  run->add_option("--step", ra.step, "GLM step size")->capture_default_str();
  run->add_option("--T", ra.T, "horizon (default: dataset size or synthetic T)");
  run->add_option("--seed", ra.seed)->capture_default_str();
  auto* data_opt = run->add_option("--data", ra.data, "multiclass CSV")->check(CLI::ExistingFile);
  auto* syn_opt = run->add_option("--synthetic", ra.synthetic, "e.g. A=4,X=10,F=16,L=100,T=10000");
  data_opt->excludes(syn_opt);
  run->add_option("--out", ra.out, "output directory")->capture_default_str();

  std::string config_path, sweep_out = "sweep_out";
  std::vector<std::string> sweep_data;
  std::size_t sweep_threads = 0;
  auto* sw = app.add_subcommand("sweep", "hyperparameter sweep and head-to-head report");
  sw->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  sw->add_option("--data", sweep_data, "additional dataset CSVs")->check(CLI::ExistingFile);
  sw->add_option("--out", sweep_out)->capture_default_str();
  sw->add_option("--threads", sweep_threads, "worker threads (0: all cores)");

  std::string checks = "tri,perround,perround-rewards,regret-decomposition,expconcave";
  std::size_t samples = 1'000'000;
  std::uint64_t vseed = 1;
  bool witnesses = false;
  auto* ver = app.add_subcommand("verify", "randomized inequality checks");
  ver->add_option("--checks", checks,
                  "comma list of tri, perround, perround-rewards, regret-decomposition (alias lemma32), policymass, expconcave, aggregation")
      ->capture_default_str();
  ver->add_option("--samples", samples)->capture_default_str();
  ver->add_option("--seed", vseed)->capture_default_str();
  ver->add_flag("--witnesses", witnesses, "print near-tight witnesses");

  std::uint64_t lb_n = 200'000'000;
  std::size_t lb_reps = 500;
  std::uint64_t lb_seed = 1;
  std::string lb_out = "lowerbound_out";
  auto* lb = app.add_subcommand("lowerbound", "least-squares plug-in failure simulation");
  lb->add_option("--n", lb_n)->capture_default_str();
  lb->add_option("--replicates", lb_reps)->capture_default_str();
  lb->add_option("--seed", lb_seed)->capture_default_str();
  lb->add_option("--out", lb_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (ra.data.empty() && ra.synthetic.empty()) throw std::invalid_argument("run: need --data or --synthetic");
      return cmd_run(ra);
    }
    if (*sw) return cmd_sweep(config_path, sweep_data, sweep_out, sweep_threads);
    if (*ver) return cmd_verify(checks, samples, vseed, witnesses);
    if (*lb) return cmd_lowerbound(lb_n, lb_reps, lb_seed, lb_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
