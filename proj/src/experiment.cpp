#include "gaillin/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gaillin/eval.hpp"
#include "gaillin/generators.hpp"
#include "gaillin/ogap.hpp"
#include "gaillin/pgap.hpp"
#include "gaillin/plot.hpp"
#include "gaillin/serialize.hpp"

namespace gaillin {

using nlohmann::json;

OgapSweepResult ogap_optimism_sweep(const LinearKernelMdp& mdp,
                                    const RewardFeatures& features, const Policy& expert,
                                    int episodes, int n1, int n_seeds, double kappa_scale,
                                    double xi, bool nonneg, std::uint64_t base_seed,
                                    bool eval_regret) {
  OgapSweepResult result;
  result.seeds_total = n_seeds;
  result.final_regret.assign(n_seeds, 0.0);
  std::vector<int> seed_ok(n_seeds, 0);
  std::vector<int> audit_ok(n_seeds, 1);
  std::vector<double> breach(n_seeds, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_seeds; ++i) {
    const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
    const DemoSet demos = generate_demos(mdp, expert, n1, derive_seed(seed, 0xD));
    OgapConfig config = OgapConfig::with_defaults(mdp, features, episodes, seed);
    config.kappa_scale = kappa_scale;
    config.xi = xi;
    config.nonnegative_rewards = nonneg;
    const OgapRunLog log = run_ogap(mdp, features, demos, config);

    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < episodes; ++k)
      for (int h = 0; h < mdp.horizon; ++h) {
        const double iota = log.iota_visited.at(k, h);
        const double lower = -2.0 * log.gamma_visited.at(k, h);
        worst = std::max({worst, iota, lower - iota});
        if (iota > 1e-8 || iota < lower - 1e-8) ok = false;
      }
    seed_ok[i] = ok ? 1 : 0;
    breach[i] = worst;
    for (int h = 0; h < mdp.horizon; ++h) {
      const EllipticalAudit audit =
          elliptical_potential_audit(log.regressors[h], mdp.dim_p, config.lambda);
      if (!audit.holds()) audit_ok[i] = 0;
    }
    if (eval_regret) {
      const RegretReport report =
          worst_case_regret(mdp, expert, log.policies, features);
      result.final_regret[i] = report.final_regret();
    }
  }
  for (int i = 0; i < n_seeds; ++i) {
    result.seeds_ok += seed_ok[i];
    if (!audit_ok[i]) result.audits_ok = false;
    result.worst_breach = std::max(result.worst_breach, breach[i]);
  }
  return result;
}

PgapSweepResult pgap_pessimism_sweep(const LinearKernelMdp& mdp,
                                     const RewardFeatures& features, const Policy& expert,
                                     int iterations, int n1, int n2, int n_seeds,
                                     double kappa_scale, double xi, bool nonneg,
                                     std::uint64_t base_seed, bool eval_gap,
                                     bool check_concavity) {
  PgapSweepResult result;
  result.seeds_total = n_seeds;
  result.gap.assign(n_seeds, 0.0);
  result.int_uncert.assign(n_seeds, 0.0);
  std::vector<int> seed_ok(n_seeds, 0), feas_fail(n_seeds, 0), concave_ok(n_seeds, 1);
  std::vector<double> breach(n_seeds, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_seeds; ++i) {
    const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(i) + 1000);
    const DemoSet demos = generate_demos(mdp, expert, n1, derive_seed(seed, 0xD));
    const AdditionalSet additional = generate_additional(
        mdp, Behavior::fixed(expert, "expert"), n2, derive_seed(seed, 0xA));
    PgapConfig config = PgapConfig::with_defaults(mdp, features, iterations, seed);
    config.kappa_scale = kappa_scale;
    config.xi = xi;
    config.nonnegative_rewards = nonneg;
    const auto [mixed, log] = run_pgap(mdp, features, demos, additional, config);

    if (!log.kernel.feasibility.all_ok()) feas_fail[i] = 1;
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < iterations; ++k)
      for (int h = 0; h < mdp.horizon; ++h)
        for (std::size_t j = 0; j < log.iota[k][h].v.size(); ++j) {
          const double iota = log.iota[k][h].v[j];
          const double upper = 2.0 * log.kernel.gamma[h].v[j];
          worst = std::max({worst, -iota, iota - upper});
          if (iota < -1e-8 || iota > upper + 1e-8) ok = false;
        }
    seed_ok[i] = ok ? 1 : 0;
    breach[i] = worst;

    if (check_concavity) {
      // Midpoint concavity of Lhat(pi^K, .) along random feasible segments.
      Rng rng(derive_seed(seed, 0xC));
      const Policy& pi = log.policies.back();
      const auto lhat = [&](const std::vector<Eigen::VectorXd>& mu) {
        double jtilde = 0.0;
        for (int h = 0; h < mdp.horizon; ++h) jtilde += log.demo_mean_psi[h].dot(mu[h]);
        return jtilde - evaluate_pessimistic(log.kernel, features, mu, pi)
                            .vhat.at(0, mdp.init_state);
      };
      for (int trial = 0; trial < 100; ++trial) {
        const RewardModel m1 = random_reward_model(features, mdp.horizon, rng.next_u64());
        const RewardModel m2 = random_reward_model(features, mdp.horizon, rng.next_u64());
        std::vector<Eigen::VectorXd> mid(mdp.horizon);
        for (int h = 0; h < mdp.horizon; ++h) mid[h] = 0.5 * (m1.mu[h] + m2.mu[h]);
        if (lhat(mid) < 0.5 * (lhat(m1.mu) + lhat(m2.mu)) - 1e-9) concave_ok[i] = 0;
      }
    }

    if (eval_gap) {
      result.gap[i] = optimality_gap(mdp, expert, mixed, features).gap;
      result.int_uncert[i] = intrinsic_uncertainty(mdp, expert, log.kernel.gamma);
    }
  }
  for (int i = 0; i < n_seeds; ++i) {
    result.seeds_ok += seed_ok[i];
    result.feasibility_failures += feas_fail[i];
    if (!concave_ok[i]) result.concavity_ok = false;
    result.worst_breach = std::max(result.worst_breach, breach[i]);
  }
  return result;
}

namespace {

std::string detail(double value, const char* label) {
  std::ostringstream out;
  out << label << " = " << value;
  return out.str();
}

SuiteResult suite_mdp_identities() {
  SuiteResult r{"mdp-identities", true, ""};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20 && r.pass; ++seed) {
    const LinearKernelMdp mdp =
        random_tabular_mdp(3 + seed % 4, 2 + seed % 3, 2 + seed % 4, 7000 + seed);
    const RewardFeatures features =
        tabular_reward_features(mdp.num_states, mdp.num_actions);
    const RewardModel reward = random_reward_model(features, mdp.horizon, 7100 + seed);
    const Policy pi = random_policy(mdp.horizon, mdp.num_states, mdp.num_actions, 7200 + seed);
    const Policy pi_prime =
        random_policy(mdp.horizon, mdp.num_states, mdp.num_actions, 7300 + seed);
    Rng rng(7400 + seed);
    std::vector<Grid2> qhat(mdp.horizon, Grid2(mdp.num_states, mdp.num_actions));
    for (auto& g : qhat)
      for (double& q : g.v) q = 6.0 * (rng.uniform() - 0.4);
    worst = std::max(worst, extended_value_difference_gap(mdp, reward, qhat, pi, pi_prime));

    // Occupancy identity and normalization.
    const auto rho = occupancy_measures(mdp, pi);
    double weighted = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      double mass = 0.0;
      for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) {
          weighted += rho[h].at(s, a) * reward.reward(h, s, a);
          mass += rho[h].at(s, a);
        }
      if (std::abs(mass - 1.0) > 1e-9) r.pass = false;
    }
    if (std::abs(weighted - expected_return(mdp, reward, pi)) > 1e-10) r.pass = false;
  }
  if (worst > 1e-9) r.pass = false;
  r.detail = detail(worst, "max value-difference gap");
  return r;
}

SuiteResult suite_numerics() {
  SuiteResult r{"numerics", true, ""};
  Rng rng(8000);
  // Ridge drift against a dense solve.
  for (int dim : {8, 24, 60}) {
    RidgeAccumulator acc(dim, 1.0);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < 400; ++i) {
      Eigen::VectorXd u(dim);
      for (int j = 0; j < dim; ++j) u[j] = rng.gaussian();
      const double y = rng.gaussian();
      acc.update(u, y);
      gram += u * u.transpose();
      rhs += y * u;
    }
    const Eigen::VectorXd dense = gram.ldlt().solve(rhs);
    if ((acc.solution() - dense).norm() > 1e-8 * std::max(1.0, dense.norm())) r.pass = false;
  }
  // Ball projection sweep and mirror-descent support preservation.
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd v(6);
    for (int j = 0; j < 6; ++j) v[j] = 4.0 * rng.gaussian();
    if (project_ball(v, 1.3).norm() > 1.3 + 1e-12) r.pass = false;
  }
  std::vector<double> row = {0.0, 0.25, 0.75};
  std::vector<double> q = {9.0, 1.0, -1.0};
  if (mirror_descent_step(row, q, 3.0)[0] != 0.0) r.pass = false;
  // Elliptical potential on random sequences.
  std::vector<Eigen::VectorXd> us;
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd u(5);
    for (int j = 0; j < 5; ++j) u[j] = 1.2 * rng.gaussian();
    us.push_back(u);
  }
  if (!elliptical_potential_audit(us, 5, 1.0).holds()) r.pass = false;
  r.detail = "ridge drift, projections, mirror support, elliptical potential";
  return r;
}

SuiteResult suite_ogap_optimism() {
  const LinearKernelMdp mdp = random_tabular_mdp(4, 3, 4, 9001);
  const RewardFeatures features = tabular_reward_features(4, 3);
  const RewardModel truth = random_reward_model(features, 4, 9002, 1.0, true);
  const Policy expert = optimal_policy(mdp, truth);
  const OgapSweepResult sweep =
      ogap_optimism_sweep(mdp, features, expert, 500, 1000, 20, 2.0, 0.1, true, 9003);
  SuiteResult r{"ogap-optimism", sweep.seeds_ok >= 18 && sweep.audits_ok, ""};
  std::ostringstream out;
  out << sweep.seeds_ok << "/" << sweep.seeds_total
      << " seeds in sandwich, worst breach " << sweep.worst_breach
      << (sweep.audits_ok ? ", audits ok" : ", AUDIT FAILURE");
  r.detail = out.str();
  return r;
}

SuiteResult suite_pgap_pessimism() {
  const LinearKernelMdp mdp = random_tabular_mdp(4, 3, 4, 9101);
  const RewardFeatures features = tabular_reward_features(4, 3);
  const RewardModel truth = random_reward_model(features, 4, 9102, 1.0, true);
  const Policy expert = optimal_policy(mdp, truth);
  const PgapSweepResult sweep = pgap_pessimism_sweep(mdp, features, expert, 500, 500, 5000,
                                                     20, 2.0, 0.1, true, 9103);
  SuiteResult r{"pgap-pessimism",
                sweep.seeds_ok >= 18 && sweep.concavity_ok &&
                    sweep.feasibility_failures == 0,
                ""};
  std::ostringstream out;
  out << sweep.seeds_ok << "/" << sweep.seeds_total << " seeds in sandwich, "
      << sweep.feasibility_failures << " feasibility failures, worst breach "
      << sweep.worst_breach << (sweep.concavity_ok ? ", concave" : ", CONCAVITY FAILURE");
  r.detail = out.str();
  return r;
}

SuiteResult suite_coverage() {
  SuiteResult r{"coverage", true, ""};
  const LinearKernelMdp mdp = random_tabular_mdp(4, 3, 3, 9201);
  const RewardFeatures features = tabular_reward_features(4, 3);
  const RewardModel truth = random_reward_model(features, 3, 9202);
  const Policy expert = optimal_policy(mdp, truth);
  const AdditionalSet expert_data =
      generate_additional(mdp, Behavior::fixed(expert, "expert"), 10000, 9203);
  const double c = coverage_ratio(mdp, expert_data, expert);
  if (c < 0.8) r.pass = false;
  const AdditionalSet unif = generate_additional(mdp, Behavior::uniform(), 800, 9204);
  double prev = 0.0;
  for (int n : {200, 400, 800}) {
    AdditionalSet prefix;
    prefix.trajectories.assign(unif.trajectories.begin(), unif.trajectories.begin() + n);
    const double cn = coverage_ratio(mdp, prefix, expert);
    if (n * cn < prev - 1e-9) r.pass = false;
    prev = n * cn;
  }
  r.detail = detail(c, "expert-data coverage");
  return r;
}

SuiteResult suite_eval_closed_form() {
  SuiteResult r{"eval-closed-form", true, ""};
  Rng seeds(9300);
  for (int inst = 0; inst < 10 && r.pass; ++inst) {
    const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 3, seeds.next_u64());
    const RewardFeatures features = tabular_reward_features(3, 2);
    const Policy expert = random_policy(3, 3, 2, seeds.next_u64());
    std::vector<Policy> iterates;
    for (int i = 0; i < 3; ++i) iterates.push_back(random_policy(3, 3, 2, seeds.next_u64()));
    const RegretReport report = worst_case_regret(mdp, expert, iterates, features);
    RewardModel at_star;
    at_star.psi = features;
    at_star.mu = report.mu_star;
    double at_max = 0.0;
    for (const auto& pi : iterates) at_max += gail_objective(mdp, at_star, expert, pi);
    if (std::abs(at_max - report.final_regret()) > 1e-9) r.pass = false;
    for (int trial = 0; trial < 10000; ++trial) {
      const RewardModel sample = random_reward_model(features, 3, seeds.next_u64());
      double value = 0.0;
      for (const auto& pi : iterates) value += gail_objective(mdp, sample, expert, pi);
      if (value > report.final_regret() + 1e-9) {
        r.pass = false;
        break;
      }
    }
    // K-copies additivity.
    MixedPolicy single;
    single.iterates.push_back(iterates[0]);
    const GapReport gap = optimality_gap(mdp, expert, single, features);
    std::vector<Policy> copies(5, iterates[0]);
    const RegretReport rep5 = worst_case_regret(mdp, expert, copies, features);
    if (std::abs(rep5.final_regret() - 5.0 * gap.gap) > 1e-9) r.pass = false;
  }
  r.detail = "ball maximizer dominance, attainment, K-copy additivity";
  return r;
}

}  // namespace

std::vector<SuiteResult> run_invariant_suites(const std::string& filter) {
  const std::vector<std::string> known = {"mdp-identities", "numerics", "ogap-optimism",
                                          "pgap-pessimism", "coverage", "eval-closed-form"};
  if (!filter.empty() && std::find(known.begin(), known.end(), filter) == known.end())
    throw std::invalid_argument("unknown invariant suite '" + filter + "'");
  std::vector<SuiteResult> results;
  const auto want = [&](const char* name) { return filter.empty() || filter == name; };
  if (want("mdp-identities")) results.push_back(suite_mdp_identities());
  if (want("numerics")) results.push_back(suite_numerics());
  if (want("ogap-optimism")) results.push_back(suite_ogap_optimism());
  if (want("pgap-pessimism")) results.push_back(suite_pgap_pessimism());
  if (want("coverage")) results.push_back(suite_coverage());
  if (want("eval-closed-form")) results.push_back(suite_eval_closed_form());
  return results;
}

namespace {

struct InstanceBundle {
  LinearKernelMdp mdp;
  RewardFeatures features;
  RewardModel truth;
  Policy expert;
};

InstanceBundle build_instance(const ExperimentConfig& config) {
  InstanceBundle b;
  if (config.mdp_source == "file") {
    Instance inst = load_instance(config.mdp_path);
    b.mdp = std::move(inst.mdp);
    b.truth = std::move(inst.reward);
    b.features = b.truth.psi;
  } else {
    b.mdp = random_tabular_mdp(config.states, config.actions, config.horizon,
                               config.instance_seed);
    b.features = tabular_reward_features(config.states, config.actions);
    b.truth = random_reward_model(b.features, config.horizon, config.instance_seed + 1,
                                  config.truth_scale, config.nonneg_rewards);
  }
  b.expert = optimal_policy(b.mdp, b.truth);
  return b;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

int run_ogap_experiment(const ExperimentConfig& config, const InstanceBundle& inst) {
  struct Cell {
    int k;
    std::uint64_t seed;
    double final_regret = 0.0;
    std::string error;
  };
  std::vector<Cell> cells;
  for (int k : config.k_grid)
    for (std::uint64_t seed : config.seeds) cells.push_back({k, seed, 0.0, ""});

  const int n_cells = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_cells; ++i) {
    Cell& cell = cells[i];
    try {
      const DemoSet demos =
          generate_demos(inst.mdp, inst.expert, config.n1, derive_seed(cell.seed, 0xD));
      OgapConfig run_config =
          OgapConfig::with_defaults(inst.mdp, inst.features, cell.k, cell.seed);
      if (config.alpha) run_config.alpha = *config.alpha;
      if (config.eta) run_config.eta = *config.eta;
      run_config.lambda = config.lambda;
      run_config.kappa_scale = config.kappa_scale;
      run_config.xi = config.xi;
      run_config.nonnegative_rewards = config.nonneg_rewards;
      run_config.record_full_iota = config.diagnostics;
      const OgapRunLog log = run_ogap(inst.mdp, inst.features, demos, run_config);
      const RegretReport report =
          worst_case_regret(inst.mdp, inst.expert, log.policies, inst.features);
      cell.final_regret = report.final_regret();

      const std::string dir = config.out_dir + "/runs/ogap_K" + std::to_string(cell.k) +
                              "_s" + std::to_string(cell.seed);
      save_ogap_log(log, dir, "../instance.json", config.diagnostics);
      std::ofstream regret_csv(dir + "/regret.csv");
      regret_csv << "k,cumulative_regret\n";
      for (std::size_t k = 0; k < report.cumulative.size(); ++k)
        regret_csv << (k + 1) << ',' << format_double(report.cumulative[k]) << "\n";
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }

  for (const Cell& cell : cells)
    if (!cell.error.empty()) {
      json err{{"k", cell.k}, {"seed", cell.seed}, {"error", cell.error}};
      std::ofstream(config.out_dir + "/error.json") << err.dump(1) << "\n";
      std::cerr << "run aborted (K=" << cell.k << ", seed=" << cell.seed
                << "): " << cell.error << "\n";
      return 3;
    }

  // Aggregate: per-seed series plus the per-K median.
  std::ofstream curve(config.out_dir + "/regret_curve.csv");
  curve << "x,y,series\n";
  json report;
  report["mode"] = "ogap";
  json runs = json::array();
  std::vector<double> grid_k, grid_median;
  for (int k : config.k_grid) {
    std::vector<double> at_k;
    for (const Cell& cell : cells)
      if (cell.k == k) {
        at_k.push_back(cell.final_regret);
        curve << k << ',' << format_double(cell.final_regret) << ",seed"
              << cell.seed << "\n";
        runs.push_back({{"k", cell.k}, {"seed", cell.seed}, {"regret", cell.final_regret}});
      }
    grid_k.push_back(k);
    grid_median.push_back(median(at_k));
  }
  for (std::size_t i = 0; i < grid_k.size(); ++i)
    curve << grid_k[i] << ',' << format_double(grid_median[i]) << ",median\n";
  curve.close();
  report["runs"] = runs;
  report["median_regret"] = grid_median;

  std::string annotation;
  if (grid_k.size() >= 4) {
    const SlopeFit fit = slope_fit(grid_k, grid_median);
    report["slope"] = fit.slope;
    std::ostringstream a;
    a.precision(3);
    a << "slope " << fit.slope;
    annotation = a.str();
  }
  std::ofstream(config.out_dir + "/report.json") << report.dump(1) << "\n";
  render_plot(config.out_dir + "/regret_curve.csv", config.out_dir + "/regret_curve.svg",
              annotation);
  return 0;
}

int run_pgap_experiment(const ExperimentConfig& config, const InstanceBundle& inst) {
  struct Cell {
    int n2;
    std::uint64_t seed;
    double gap = 0.0;
    double int_uncert = 0.0;
    std::string error;
  };
  std::vector<int> n2_values = config.n2_grid.empty() ? std::vector<int>{config.n2}
                                                      : config.n2_grid;
  std::vector<Cell> cells;
  for (int n2 : n2_values)
    for (std::uint64_t seed : config.seeds) cells.push_back({n2, seed, 0.0, 0.0, ""});
  const int iterations = config.k_grid.front();

  const int n_cells = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_cells; ++i) {
    Cell& cell = cells[i];
    try {
      const DemoSet demos =
          generate_demos(inst.mdp, inst.expert, config.n1, derive_seed(cell.seed, 0xD));
      const Behavior behavior = config.behavior == "expert"
                                    ? Behavior::fixed(inst.expert, "expert")
                                    : Behavior::uniform();
      const AdditionalSet additional =
          generate_additional(inst.mdp, behavior, cell.n2, derive_seed(cell.seed, 0xA));
      PgapConfig run_config =
          PgapConfig::with_defaults(inst.mdp, inst.features, iterations, cell.seed);
      if (config.alpha) run_config.alpha = *config.alpha;
      if (config.eta) run_config.eta = *config.eta;
      run_config.lambda = config.lambda;
      run_config.kappa_scale = config.kappa_scale;
      run_config.xi = config.xi;
      run_config.nonnegative_rewards = config.nonneg_rewards;
      const auto [mixed, log] = run_pgap(inst.mdp, inst.features, demos, additional,
                                         run_config);
      cell.gap = optimality_gap(inst.mdp, inst.expert, mixed, inst.features).gap;
      cell.int_uncert = intrinsic_uncertainty(inst.mdp, inst.expert, log.kernel.gamma);

      const std::string dir = config.out_dir + "/runs/pgap_N" + std::to_string(cell.n2) +
                              "_s" + std::to_string(cell.seed);
      save_pgap_log(log, dir, "../instance.json", config.diagnostics);
      std::ofstream gap_csv(dir + "/gap.csv");
      gap_csv << "n2,gap,int_uncert\n"
              << cell.n2 << ',' << format_double(cell.gap) << ','
              << format_double(cell.int_uncert) << "\n";
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }

  for (const Cell& cell : cells)
    if (!cell.error.empty()) {
      json err{{"n2", cell.n2}, {"seed", cell.seed}, {"error", cell.error}};
      std::ofstream(config.out_dir + "/error.json") << err.dump(1) << "\n";
      std::cerr << "run aborted (N2=" << cell.n2 << ", seed=" << cell.seed
                << "): " << cell.error << "\n";
      return 3;
    }

  std::ofstream curve(config.out_dir + "/gap_curve.csv");
  curve << "x,y,series\n";
  json report;
  report["mode"] = "pgap";
  report["iterations"] = iterations;
  json runs = json::array();
  std::vector<double> grid_n2, grid_gap, grid_unc;
  for (int n2 : n2_values) {
    std::vector<double> gaps, uncs;
    for (const Cell& cell : cells)
      if (cell.n2 == n2) {
        gaps.push_back(cell.gap);
        uncs.push_back(cell.int_uncert);
        curve << std::max(n2, 1) << ',' << format_double(cell.gap) << ",seed" << cell.seed
              << "\n";
        runs.push_back({{"n2", cell.n2},
                        {"seed", cell.seed},
                        {"gap", cell.gap},
                        {"int_uncert", cell.int_uncert}});
      }
    grid_n2.push_back(std::max(n2, 1));
    grid_gap.push_back(median(gaps));
    grid_unc.push_back(median(uncs));
  }
  for (std::size_t i = 0; i < grid_n2.size(); ++i)
    curve << grid_n2[i] << ',' << format_double(grid_gap[i]) << ",median\n";
  curve.close();
  report["runs"] = runs;
  report["median_gap"] = grid_gap;
  report["median_int_uncert"] = grid_unc;
  std::ofstream(config.out_dir + "/report.json") << report.dump(1) << "\n";
  render_plot(config.out_dir + "/gap_curve.csv", config.out_dir + "/gap_curve.svg");
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  config.validate();

  if (config.mode == ExperimentConfig::Mode::Invariants) {
    const std::vector<SuiteResult> results = run_invariant_suites(config.suite);
    bool all = true;
    std::cout << "suite                 result  detail\n";
    for (const auto& r : results) {
      std::cout << r.name;
      for (std::size_t i = r.name.size(); i < 22; ++i) std::cout << ' ';
      std::cout << (r.pass ? "PASS" : "FAIL") << "    " << r.detail << "\n";
      all = all && r.pass;
    }
    return all ? 0 : 1;
  }

  std::filesystem::create_directories(config.out_dir + "/runs");
  const InstanceBundle inst = build_instance(config);
  save_instance(inst.mdp, inst.truth, config.out_dir + "/instance.json");

  json manifest;
  manifest["mode"] = config.mode == ExperimentConfig::Mode::Pgap ? "pgap"
                     : config.mode == ExperimentConfig::Mode::Sweep ? "sweep"
                                                                    : "ogap";
  manifest["seeds"] = config.seeds;
  manifest["k_grid"] = config.k_grid;
  manifest["n2_grid"] = config.n2_grid;
  manifest["n1"] = config.n1;
  manifest["n2"] = config.n2;
  manifest["behavior"] = config.behavior;
  manifest["kappa_scale"] = config.kappa_scale;
  manifest["xi"] = config.xi;
  manifest["lambda"] = config.lambda;
  manifest["nonneg_rewards"] = config.nonneg_rewards;
  manifest["diagnostics"] = config.diagnostics;
  manifest["instance"] = "instance.json";
  std::ofstream(config.out_dir + "/manifest.json") << manifest.dump(1) << "\n";

  try {
    if (config.mode == ExperimentConfig::Mode::Pgap)
      return run_pgap_experiment(config, inst);
    return run_ogap_experiment(config, inst);
  } catch (const std::exception& e) {
    json err{{"error", e.what()}};
    std::ofstream(config.out_dir + "/error.json") << err.dump(1) << "\n";
    std::cerr << "experiment aborted: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gaillin
