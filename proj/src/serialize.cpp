#include "gaillin/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

namespace gaillin {

using nlohmann::json;

namespace {

constexpr int kInstanceVersion = 1;

bool is_tabular_phi(const LinearKernelMdp& mdp) {
  if (mdp.dim_p != mdp.num_states * mdp.num_states * mdp.num_actions) return false;
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      for (int sp = 0; sp < mdp.num_states; ++sp) {
        const auto f = mdp.phi_vec(s, a, sp);
        const long hot = (static_cast<long>(s) * mdp.num_actions + a) * mdp.num_states + sp;
        for (int i = 0; i < mdp.dim_p; ++i)
          if (f[i] != (i == hot ? 1.0 : 0.0)) return false;
      }
  return true;
}

bool is_tabular_psi(const RewardFeatures& f) {
  if (f.dim_r != f.num_states * f.num_actions) return false;
  for (int s = 0; s < f.num_states; ++s)
    for (int a = 0; a < f.num_actions; ++a) {
      const auto v = f.vec(s, a);
      const long hot = static_cast<long>(s) * f.num_actions + a;
      for (int i = 0; i < f.dim_r; ++i)
        if (v[i] != (i == hot ? 1.0 : 0.0)) return false;
    }
  return true;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

void save_instance(const LinearKernelMdp& mdp, const RewardModel& reward,
                   const std::string& path) {
  json doc;
  doc["version"] = kInstanceVersion;
  doc["num_states"] = mdp.num_states;
  doc["num_actions"] = mdp.num_actions;
  doc["horizon"] = mdp.horizon;
  doc["init_state"] = mdp.init_state;
  doc["regularity_r"] = mdp.regularity_r;
  doc["dim_p"] = mdp.dim_p;
  doc["dim_r"] = reward.psi.dim_r;

  if (is_tabular_phi(mdp)) {
    doc["phi"] = "tabular";
  } else {
    json phi = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < mdp.num_actions; ++a) {
        json by_sp = json::array();
        for (int sp = 0; sp < mdp.num_states; ++sp)
          by_sp.push_back(vector_to_json(mdp.phi_vec(s, a, sp)));
        by_a.push_back(by_sp);
      }
      phi.push_back(by_a);
    }
    doc["phi"] = phi;
  }

  json theta = json::array();
  for (const auto& t : mdp.theta) theta.push_back(vector_to_json(t));
  doc["theta"] = theta;

  if (is_tabular_psi(reward.psi)) {
    doc["psi"] = "tabular";
  } else {
    json psi = json::array();
    for (int s = 0; s < reward.psi.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < reward.psi.num_actions; ++a)
        by_a.push_back(vector_to_json(reward.psi.vec(s, a)));
      psi.push_back(by_a);
    }
    doc["psi"] = psi;
  }

  json mu = json::array();
  for (const auto& m : reward.mu) mu.push_back(vector_to_json(m));
  doc["mu"] = mu;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path);
  out << doc.dump(1) << "\n";
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path);
  json doc = json::parse(in);
  for (const char* key : {"version", "num_states", "num_actions", "horizon", "init_state",
                          "regularity_r", "dim_p", "dim_r", "phi", "theta", "psi", "mu"})
    if (!doc.contains(key))
      throw std::runtime_error(std::string("load_instance: missing field ") + key);

  Instance inst;
  LinearKernelMdp& mdp = inst.mdp;
  mdp.num_states = doc["num_states"].get<int>();
  mdp.num_actions = doc["num_actions"].get<int>();
  mdp.horizon = doc["horizon"].get<int>();
  mdp.init_state = doc["init_state"].get<int>();
  mdp.regularity_r = doc["regularity_r"].get<double>();
  mdp.dim_p = doc["dim_p"].get<int>();

  if (doc["phi"].is_string() && doc["phi"] == "tabular") {
    TabularEmbedding emb = tabular_embedding(mdp.num_states, mdp.num_actions);
    if (emb.dim_p != mdp.dim_p)
      throw std::runtime_error("load_instance: tabular dim_p mismatch");
    mdp.phi = std::move(emb.phi);
  } else {
    mdp.phi.resize(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions *
                   mdp.num_states * mdp.dim_p);
    const json& phi = doc["phi"];
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a)
        for (int sp = 0; sp < mdp.num_states; ++sp) {
          const json& arr = phi.at(s).at(a).at(sp);
          if (static_cast<int>(arr.size()) != mdp.dim_p)
            throw std::runtime_error("load_instance: phi entry dimension mismatch");
          const std::size_t off =
              ((static_cast<std::size_t>(s) * mdp.num_actions + a) * mdp.num_states + sp) *
              mdp.dim_p;
          for (int i = 0; i < mdp.dim_p; ++i) mdp.phi[off + i] = arr[i].get<double>();
        }
  }

  for (const auto& t : doc["theta"]) mdp.theta.push_back(vector_from_json(t));

  RewardModel& reward = inst.reward;
  reward.psi.num_states = mdp.num_states;
  reward.psi.num_actions = mdp.num_actions;
  reward.psi.dim_r = doc["dim_r"].get<int>();
  if (doc["psi"].is_string() && doc["psi"] == "tabular") {
    TabularEmbedding emb = tabular_embedding(mdp.num_states, mdp.num_actions);
    if (emb.dim_r != reward.psi.dim_r)
      throw std::runtime_error("load_instance: tabular dim_r mismatch");
    reward.psi.psi = std::move(emb.psi);
  } else {
    reward.psi.psi.resize(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions *
                          reward.psi.dim_r);
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        const json& arr = doc["psi"].at(s).at(a);
        const std::size_t off =
            (static_cast<std::size_t>(s) * mdp.num_actions + a) * reward.psi.dim_r;
        for (int i = 0; i < reward.psi.dim_r; ++i)
          reward.psi.psi[off + i] = arr[i].get<double>();
      }
  }
  for (const auto& m : doc["mu"]) reward.mu.push_back(vector_from_json(m));

  mdp.validate();
  reward.validate(mdp.horizon);
  return inst;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

json config_json(const OgapConfig& c) {
  return json{{"episodes", c.episodes},       {"alpha", c.alpha},
              {"eta", c.eta},                 {"lambda", c.lambda},
              {"kappa_scale", c.kappa_scale}, {"xi", c.xi},
              {"seed", c.seed},               {"nonnegative_rewards", c.nonnegative_rewards}};
}

json config_json(const PgapConfig& c) {
  return json{{"iterations", c.iterations},   {"alpha", c.alpha},
              {"eta", c.eta},                 {"lambda", c.lambda},
              {"kappa_scale", c.kappa_scale}, {"xi", c.xi},
              {"seed", c.seed},               {"nonnegative_rewards", c.nonnegative_rewards}};
}

void dump_grids(const std::vector<std::vector<Grid2>>& tensors, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& per_h : tensors)
    for (const auto& g : per_h)
      out.write(reinterpret_cast<const char*>(g.v.data()),
                static_cast<std::streamsize>(g.v.size() * sizeof(double)));
}

}  // namespace

void save_ogap_log(const OgapRunLog& log, const std::string& dir,
                   const std::string& mdp_ref, bool diagnostics) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["algorithm"] = "ogap";
  manifest["config"] = config_json(log.config);
  manifest["mdp"] = mdp_ref;
  manifest["horizon"] = log.horizon;
  manifest["num_states"] = log.num_states;
  manifest["num_actions"] = log.num_actions;
  manifest["dim_p"] = log.dim_p;
  manifest["dim_r"] = log.dim_r;
  manifest["diagnostics"] = diagnostics;
  std::ofstream(dir + "/manifest.json") << manifest.dump(1) << "\n";

  std::ofstream csv(dir + "/episodes.csv");
  csv << "k,h,state,action,gamma_visited,iota_visited,mu_norm,vhat1\n";
  for (std::size_t k = 0; k < log.trajectories.size(); ++k)
    for (int h = 0; h < log.horizon; ++h) {
      csv << (k + 1) << ',' << (h + 1) << ',' << log.trajectories[k].states[h] << ','
          << log.trajectories[k].actions[h] << ','
          << format_double(log.gamma_visited.at(static_cast<int>(k), h)) << ','
          << format_double(log.iota_visited.at(static_cast<int>(k), h)) << ','
          << format_double(log.mu[k][h].norm()) << ','
          << format_double(log.vhat[k].at(0, 0)) << "\n";
    }

  if (diagnostics) {
    dump_grids(log.qhat, dir + "/qhat.bin");
    dump_grids(log.gamma, dir + "/gamma.bin");
    if (!log.iota_full.empty()) dump_grids(log.iota_full, dir + "/iota_full.bin");
  }
}

void save_pgap_log(const PgapRunLog& log, const std::string& dir,
                   const std::string& mdp_ref, bool diagnostics) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["algorithm"] = "pgap";
  manifest["config"] = config_json(log.config);
  manifest["mdp"] = mdp_ref;
  manifest["horizon"] = log.horizon;
  manifest["num_states"] = log.num_states;
  manifest["num_actions"] = log.num_actions;
  manifest["dim_p"] = log.dim_p;
  manifest["dim_r"] = log.dim_r;
  manifest["diagnostics"] = diagnostics;
  std::ofstream(dir + "/manifest.json") << manifest.dump(1) << "\n";

  // Offline construction summary: theta_hat, Gamma statistics, feasibility.
  json kernel;
  json theta = json::array();
  for (const auto& t : log.kernel.theta_hat) theta.push_back(vector_to_json(t));
  kernel["theta_hat"] = theta;
  json gamma_stats = json::array();
  for (const auto& g : log.kernel.gamma) {
    double lo = g.v[0], hi = g.v[0], sum = 0.0;
    for (double x : g.v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      sum += x;
    }
    gamma_stats.push_back(
        {{"min", lo}, {"max", hi}, {"mean", sum / static_cast<double>(g.v.size())}});
  }
  kernel["gamma"] = gamma_stats;
  json feas;
  feas["violations"] = log.kernel.feasibility.violations;
  json disp = json::array();
  for (const auto& d : log.kernel.feasibility.displacement) {
    double hi = 0.0;
    for (double x : d.v) hi = std::max(hi, x);
    disp.push_back(hi);
  }
  feas["max_displacement"] = disp;
  kernel["feasibility_report"] = feas;
  std::ofstream(dir + "/kernel_estimate.json") << kernel.dump(1) << "\n";

  std::ofstream csv(dir + "/episodes.csv");
  csv << "k,jhat,mu_norm_sum,iota_max,iota_min\n";
  for (std::size_t k = 0; k < log.policies.size(); ++k) {
    double mu_norm = 0.0;
    for (const auto& m : log.mu[k]) mu_norm += m.norm();
    double iota_max = -std::numeric_limits<double>::infinity();
    double iota_min = std::numeric_limits<double>::infinity();
    for (const auto& g : log.iota[k])
      for (double x : g.v) {
        iota_max = std::max(iota_max, x);
        iota_min = std::min(iota_min, x);
      }
    csv << (k + 1) << ',' << format_double(log.jhat[k]) << ',' << format_double(mu_norm)
        << ',' << format_double(iota_max) << ',' << format_double(iota_min) << "\n";
  }

  if (diagnostics) {
    dump_grids(log.qhat, dir + "/qhat.bin");
    dump_grids(log.iota, dir + "/iota.bin");
  }
}

}  // namespace gaillin
