#include "labcap/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace labcap::harness {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("[") + name + "] " + e.what());
  }
}

ReferenceRow make_reference(std::initializer_list<std::pair<const char*, ReferenceValue>> init) {
  ReferenceRow row;
  for (const auto& [k, v] : init) row.emplace(k, v);
  return row;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("config: name required");
  if (reaction.from_ces) {
    reaction.ces_params.validate();
    reaction.prices.validate();
  } else {
    if (!(reaction.beta1 * reaction.beta2 > 1.0))
      throw std::invalid_argument("config: direct reaction requires beta1*beta2 > 1");
    if (reaction.alpha1 < 0 || reaction.alpha2 < 0 || reaction.beta1 < 0 ||
        reaction.beta2 < 0)
      throw std::invalid_argument("config: reaction coefficients must be >= 0");
    if (!diffusion.scaled_units)
      throw std::invalid_argument(
          "config: raw diffusion units require CES-derived reaction "
          "coefficients (no mutualistic scale available)");
  }
  if (diffusion.c1 < 0 || diffusion.c2 < 0 || diffusion.a1 < 0 ||
      diffusion.a2 < 0 || diffusion.a11 < 0 || diffusion.a22 < 0 ||
      diffusion.a12 < 0)
    throw std::invalid_argument("config: diffusion coefficients must be >= 0");
  if (!(b_multiplier > 0.0))
    throw std::invalid_argument("config: b_multiplier must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
  if (grid_nodes < 3) throw std::invalid_argument("config: grid.nodes >= 3 required");
  if (saturation.Ks_explicit && !(*saturation.Ks_explicit > 0.0))
    throw std::invalid_argument("config: saturation.Ks must be > 0");
  if (!saturation.Ks_explicit && !(saturation.Ks_factor > 0.0))
    throw std::invalid_argument("config: saturation.Ks_factor must be > 0");
  solver.validate();
}

std::vector<std::string> preset_names() {
  return {"exp1", "exp2", "exp3", "exp4", "exp4ces"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.solver.max_steps = 400000;

  if (name == "exp1") {
    cfg.reaction.ces_params = {1.0, 0.3, 0.6, 0.5, 0.2};
    cfg.reaction.prices = {1.0, 0.3};
    cfg.diffusion = {true, 0.01, 0.01, 0.3, 3e-4, 0, 0, 0};
    cfg.gamma = 1.0;
    cfg.reference = make_reference({{"alpha1", {0.5, 0.01}},
                                    {"alpha2", {0.15, 0.01}},
                                    {"beta1", {2.35, 0.01}},
                                    {"beta2", {2.47, 0.01}},
                                    {"L_star", {0.29, 0.01}},
                                    {"K_star", {0.18, 0.01}},
                                    {"b_c", {1.56, 0.01}},
                                    {"k_c", {3.99, 0.01}}});
  } else if (name == "exp2") {
    cfg.reaction.ces_params = {1.0, 0.3, 0.6, 0.5, 0.2};
    cfg.reaction.prices = {0.4, 0.3};
    cfg.diffusion = {true, 0.01, 0.01, 7e-3, 0.01, 0, 0, 0};
    cfg.gamma = 1.0;
    cfg.reference = make_reference({{"alpha1", {0.2, 0.01}},
                                    {"alpha2", {0.15, 0.01}},
                                    {"beta1", {0.48, 0.01}},
                                    {"beta2", {8.38, 0.01}},
                                    {"L_star", {0.6, 0.01}},
                                    {"K_star", {0.09, 0.01}},
                                    {"b_c", {0.42, 0.01}},
                                    {"k_c", {6.0, 0.01}}});
  } else if (name == "exp3") {
    cfg.reaction.ces_params = {100.0, 0.29, 0.3, 0.75, 0.1};
    cfg.reaction.prices = {0.95, 0.95};
    cfg.diffusion = {true, 0.1, 0.1, 0.41, 2.4, 0, 0, 0};
    cfg.gamma = 5.0;
    cfg.solver.max_steps = 200000;
    cfg.reference = make_reference({{"alpha1", {0.24, 0.01}},
                                    {"alpha2", {0.24, 0.01}},
                                    {"beta1", {0.66, 0.01}},
                                    {"beta2", {1.97, 0.01}},
                                    {"L_star", {2.35, 0.01}},
                                    {"K_star", {1.31, 0.01}},
                                    {"b_c", {1.14, 0.01}},
                                    {"k_c", {4.02, 0.01}}});
  } else if (name == "exp4" || name == "exp4ces") {
    // The published row for this experiment is not self-consistent: its
    // alpha/beta entries cannot arise from its CES inputs, and beta2 = 5.4
    // contradicts the printed equilibrium. exp4 carries the reconstruction
    // (beta2 = 54) that reproduces the printed equilibrium, b_c and k_c;
    // exp4ces carries the CES row as printed.
    if (name == "exp4") {
      cfg.reaction.from_ces = false;
      cfg.reaction.alpha1 = 0.05;
      cfg.reaction.alpha2 = 0.15;
      cfg.reaction.beta1 = 0.045;
      cfg.reaction.beta2 = 54.0;
    } else {
      cfg.reaction.ces_params = {1.0, 0.3, 0.6, 0.5, 0.2};
      cfg.reaction.prices = {0.4, 0.5};
    }
    cfg.diffusion = {true, 0.01, 0.01, 3.72, 2.7e-5, 0, 0, 0};
    cfg.gamma = 10.0;
    cfg.solver.max_steps = 500000;
    cfg.reference = make_reference({{"alpha1", {0.05, 0.01}},
                                    {"alpha2", {0.15, 0.01}},
                                    {"beta1", {4.5e-2, 0.001}},
                                    {"beta2", {5.4, 0.1}},
                                    {"L_star", {1.96, 0.01}},
                                    {"K_star", {0.03, 0.01}},
                                    {"b_c", {205.9, 0.1}},
                                    {"k_c", {3.51, 0.01}}});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (!kv.emplace(key, val).second)
      throw std::invalid_argument("config: duplicate key '" + key + "'");
  }

  std::set<std::string> used;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  };
  auto num = [&](const std::string& key) -> std::optional<double> {
    auto s = take(key);
    if (!s) return std::nullopt;
    size_t pos = 0;
    double v;
    try {
      v = std::stod(*s, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad number for '" + key + "'");
    }
    if (pos != s->size())
      throw std::invalid_argument("config: bad number for '" + key + "'");
    return v;
  };

  ExperimentConfig cfg;
  cfg.name = take("name").value_or("experiment");

  const bool has_reaction = kv.count("reaction.alpha1") != 0;
  if (has_reaction) {
    cfg.reaction.from_ces = false;
    cfg.reaction.alpha1 = num("reaction.alpha1").value();
    cfg.reaction.alpha2 = num("reaction.alpha2").value_or(0.0);
    cfg.reaction.beta1 = num("reaction.beta1").value_or(0.0);
    cfg.reaction.beta2 = num("reaction.beta2").value_or(0.0);
  } else {
    auto need = [&](const char* key) {
      auto v = num(key);
      if (!v) throw std::invalid_argument(std::string("config: missing '") + key + "'");
      return *v;
    };
    cfg.reaction.ces_params = {need("ces.A"), need("ces.alpha"), need("ces.beta"),
                               need("ces.epsilon"), need("ces.eta")};
    cfg.reaction.prices = {need("prices.w"), need("prices.r")};
  }

  if (auto units = take("diffusion.units")) {
    if (*units == "scaled")
      cfg.diffusion.scaled_units = true;
    else if (*units == "raw")
      cfg.diffusion.scaled_units = false;
    else
      throw std::invalid_argument("config: diffusion.units must be raw or scaled");
  }
  cfg.diffusion.c1 = num("diffusion.c1").value_or(cfg.diffusion.c1);
  cfg.diffusion.c2 = num("diffusion.c2").value_or(cfg.diffusion.c2);
  cfg.diffusion.a1 = num("diffusion.a1").value_or(0.0);
  cfg.diffusion.a2 = num("diffusion.a2").value_or(0.0);
  cfg.diffusion.a11 = num("diffusion.a11").value_or(0.0);
  cfg.diffusion.a22 = num("diffusion.a22").value_or(0.0);
  cfg.diffusion.a12 = num("diffusion.a12").value_or(0.0);

  if (auto v = num("saturation.Ks")) cfg.saturation.Ks_explicit = *v;
  cfg.saturation.Ks_factor = num("saturation.Ks_factor").value_or(10.0);

  cfg.gamma = num("gamma").value_or(1.0);
  cfg.b_multiplier = num("b_multiplier").value_or(1.01);
  cfg.solver.tau = num("solver.tau").value_or(cfg.solver.tau);
  cfg.solver.tol_fp = num("solver.tol_fp").value_or(cfg.solver.tol_fp);
  cfg.solver.tol_s = num("solver.tol_s").value_or(cfg.solver.tol_s);
  if (auto v = num("solver.max_fp_iters")) cfg.solver.max_fp_iters = static_cast<int>(*v);
  if (auto v = num("solver.max_steps")) cfg.solver.max_steps = static_cast<long>(*v);
  if (auto v = num("solver.snapshot_every")) cfg.solver.snapshot_every = static_cast<int>(*v);
  if (auto v = num("grid.nodes")) cfg.grid_nodes = static_cast<int>(*v);
  cfg.ic_amplitude = num("ic.amplitude").value_or(0.05);

  for (const char* col : {"alpha1", "alpha2", "beta1", "beta2", "L_star",
                          "K_star", "b_c", "k_c"}) {
    if (auto v = num(std::string("reference.") + col)) {
      const double ulp =
          num(std::string("reference.") + col + "_ulp").value_or(0.01);
      cfg.reference[col] = {*v, ulp};
    }
  }

  for (const auto& [key, val] : kv)
    if (!used.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ExperimentConfig resolve_config(const std::string& name_or_path) {
  const auto names = preset_names();
  for (const auto& n : names)
    if (n == name_or_path) return preset(n);
  if (std::filesystem::exists(name_or_path)) return load_config(name_or_path);
  std::string msg = "'" + name_or_path + "' is neither a preset (";
  for (size_t i = 0; i < names.size(); ++i)
    msg += (i ? ", " : "") + names[i];
  msg += ") nor a config file";
  throw std::invalid_argument(msg);
}

PipelineHead pipeline_head(const ExperimentConfig& cfg) {
  cfg.validate();
  PipelineHead head;

  model::ScaledModelParams p{};
  p.gamma = cfg.gamma;
  p.c1 = cfg.diffusion.c1;
  p.c2 = cfg.diffusion.c2;
  p.b = 0.0;

  if (cfg.reaction.from_ces) {
    head.lv = stage("ces", [&] {
      return ces::derive_lv(cfg.reaction.ces_params, cfg.reaction.prices);
    });
    head.lv_derived = true;
    stage("rescale", [&] {
      // Scaled-unit diffusion input is converted back to raw units so the
      // published change of variables is applied to real inputs in one place.
      model::RawDiffusion raw;
      raw.c1 = cfg.diffusion.c1;
      raw.c2 = cfg.diffusion.c2;
      if (cfg.diffusion.scaled_units) {
        raw.a11 = cfg.diffusion.a1 * head.lv.b21_t;
        raw.a22 = cfg.diffusion.a2 / head.lv.b12_t;
        raw.a12 = cfg.diffusion.a12;
      } else {
        raw.a11 = cfg.diffusion.a11;
        raw.a22 = cfg.diffusion.a22;
        raw.a12 = cfg.diffusion.a12;
      }
      // Provisional saturation constant; resolved against the equilibrium
      // below. Chosen large enough that ellipticity holds vacuously.
      if (cfg.saturation.Ks_explicit && !cfg.diffusion.scaled_units) {
        raw.K_s = *cfg.saturation.Ks_explicit;
      } else {
        const double a2_scaled = raw.a22 * head.lv.b12_t;
        const double safe = (a2_scaled > 0.0 && cfg.diffusion.c2 > 0.0)
                                ? std::max(1.0, a2_scaled / cfg.diffusion.c2)
                                : 1.0;
        raw.K_s = safe / head.lv.b12_t;
      }
      p = model::rescale(head.lv, raw, cfg.gamma);
      return 0;
    });
  } else {
    p.alpha1 = cfg.reaction.alpha1;
    p.alpha2 = cfg.reaction.alpha2;
    p.beta1 = cfg.reaction.beta1;
    p.beta2 = cfg.reaction.beta2;
    p.a1 = cfg.diffusion.a1;
    p.a2 = cfg.diffusion.a2;
    p.K_s = 1.0;  // resolved below
  }

  head.eq = stage("equilibrium", [&] { return model::equilibrium(p); });

  if (cfg.saturation.Ks_explicit && (cfg.diffusion.scaled_units || !cfg.reaction.from_ces)) {
    p.K_s = *cfg.saturation.Ks_explicit;
  } else if (!cfg.saturation.Ks_explicit) {
    p.K_s = cfg.saturation.Ks_factor * head.eq.K_star;
  }
  stage("model", [&] {
    p.validate();
    return 0;
  });

  // First pass for b_c, second for the flags at the configured b.
  const auto rep0 = stage("stability", [&] {
    return stability::critical_threshold(p, head.eq);
  });
  head.b = cfg.b_multiplier * rep0.b_c;
  p.b = head.b;
  head.params = p;
  head.stability = stage("stability", [&] {
    return stability::critical_threshold(p, head.eq);
  });
  return head;
}

double aligned_mse(const fem::Field& fem_state, const wnl::WnlResult& res,
                   const model::Equilibrium& eq, const fem::Grid& grid) {
  if (res.regime != wnl::Regime::supercritical)
    throw std::domain_error("aligned_mse: supercritical regime required");
  const double eps = res.vectors.epsilon_ctrl;
  const double amp1 = eps * std::sqrt(res.sigma / res.ell);
  const double amp2 = eps * eps * (res.sigma / res.ell);
  const double kb = res.vectors.k_bar_c;

  double best = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    double ss = 0.0;
    for (int i = 0; i < grid.n_nodes; ++i) {
      const double x = grid.node(i);
      const double c1 = std::cos(kb * x);
      const double c2 = std::cos(2.0 * kb * x);
      const double L = eq.L_star + sign * amp1 * res.vectors.rho[0] * c1 +
                       amp2 * (res.w20[0] + res.w22[0] * c2);
      const double K = eq.K_star + sign * amp1 * res.vectors.rho[1] * c1 +
                       amp2 * (res.w20[1] + res.w22[1] * c2);
      const double dL = fem_state.L[i] - L;
      const double dK = fem_state.K[i] - K;
      ss += dL * dL + dK * dK;
    }
    best = std::min(best, ss);
  }
  return best;
}

void write_profile_csv(const std::filesystem::path& file,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& L,
                       const Eigen::VectorXd& K) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "x,L,K\n";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out << fmt17(x[i]) << ',' << fmt17(L[i]) << ',' << fmt17(K[i]) << '\n';
}

namespace {

json params_to_json(const model::ScaledModelParams& p) {
  return json{{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta1", p.beta1},
              {"beta2", p.beta2},   {"c1", p.c1},         {"c2", p.c2},
              {"a1", p.a1},         {"a2", p.a2},         {"b", p.b},
              {"K_s", p.K_s},       {"gamma", p.gamma}};
}

}  // namespace

void write_report_json(const std::filesystem::path& file,
                       const ExperimentConfig& cfg,
                       const ComparisonReport& report) {
  json j;
  j["name"] = report.name;
  j["config"] = {
      {"gamma", cfg.gamma},
      {"b_multiplier", cfg.b_multiplier},
      {"grid_nodes", cfg.grid_nodes},
      {"ic_amplitude", cfg.ic_amplitude},
      {"solver",
       {{"tau", cfg.solver.tau},
        {"tol_fp", cfg.solver.tol_fp},
        {"tol_s", cfg.solver.tol_s},
        {"max_fp_iters", cfg.solver.max_fp_iters},
        {"max_steps", cfg.solver.max_steps}}},
  };
  if (report.lv_derived) {
    j["lv"] = {{"alpha1_t", report.lv.alpha1_t}, {"alpha2_t", report.lv.alpha2_t},
               {"b11_t", report.lv.b11_t},       {"b12_t", report.lv.b12_t},
               {"b21_t", report.lv.b21_t},       {"b22_t", report.lv.b22_t},
               {"L_e", report.lv.L_e},           {"K_e", report.lv.K_e}};
  }
  j["params"] = params_to_json(report.params);
  j["equilibrium"] = {{"L_star", report.eq.L_star}, {"K_star", report.eq.K_star}};
  j["stability"] = {
      {"b_c", report.stability.b_c},
      {"k_c", report.stability.k_c},
      {"m1", report.stability.m1},
      {"m2", report.stability.m2},
      {"q", report.stability.q},
      {"det_R", report.stability.det_R},
      {"det_Q", report.stability.det_Q},
      {"necessary_condition", report.stability.necessary_condition},
      {"is_turing_unstable", report.stability.is_turing_unstable},
      {"sufficient_bif", report.stability.sufficient.bif},
  };
  if (report.stability.sufficient.bif2)
    j["stability"]["sufficient_bif2"] = *report.stability.sufficient.bif2;
  if (report.stability.band) {
    j["stability"]["k1_sq"] = report.stability.band->first;
    j["stability"]["k2_sq"] = report.stability.band->second;
  }
  j["b"] = report.b;
  j["wnl"] = {
      {"sigma", report.wnl.sigma},
      {"ell", report.wnl.ell},
      {"regime", report.wnl.regime == wnl::Regime::supercritical
                     ? "supercritical"
                     : "subcritical"},
      {"M", report.wnl.vectors.M},
      {"M_star", report.wnl.vectors.M_star},
      {"k_bar_c", report.wnl.vectors.k_bar_c},
      {"epsilon_ctrl", report.wnl.vectors.epsilon_ctrl},
      {"w20", {report.wnl.w20[0], report.wnl.w20[1]}},
      {"w22", {report.wnl.w22[0], report.wnl.w22[1]}},
  };
  if (report.wnl.A_inf) j["wnl"]["A_inf"] = *report.wnl.A_inf;
  j["fem"] = {
      {"reached_steady", report.reached_steady},
      {"t_final", report.t_final},
      {"total_fp_iterations", report.total_fp_iterations},
      {"max_fp_iterations", report.max_fp_iterations},
      {"negativity_warning", report.negativity_warning},
  };
  if (report.T_s) j["fem"]["T_s"] = *report.T_s;
  if (report.mse) j["comparison"]["mse"] = *report.mse;
  if (report.dominant_mode) j["comparison"]["dominant_mode"] = *report.dominant_mode;

  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

ComparisonReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir) {
  const PipelineHead head = pipeline_head(cfg);

  ComparisonReport rep;
  rep.name = cfg.name;
  rep.lv = head.lv;
  rep.lv_derived = head.lv_derived;
  rep.params = head.params;
  rep.eq = head.eq;
  rep.stability = head.stability;
  rep.b = head.b;
  rep.wnl = stage("wnl", [&] {
    return wnl::analyze(head.params, head.eq, head.b);
  });

  const fem::Grid grid = fem::Grid::uniform(cfg.grid_nodes);
  const fem::Trajectory traj = stage("fem", [&] {
    const fem::Field ic = fem::initial_condition(head.eq, grid, cfg.ic_amplitude);
    return fem::run_to_steady(ic, head.params, grid, cfg.solver);
  });
  rep.T_s = traj.T_s;
  rep.reached_steady = traj.reached_steady;
  rep.t_final = traj.t_final;
  rep.total_fp_iterations = traj.total_fp_iterations;
  rep.max_fp_iterations = traj.max_fp_iterations;
  rep.negativity_warning = traj.negativity_warning;

  Eigen::VectorXd centered = traj.final_state.L;
  centered.array() -= head.eq.L_star;
  rep.dominant_mode = fem::dominant_cosine_mode(centered, grid);

  const auto dir = out_dir / cfg.name;
  std::filesystem::create_directories(dir);
  const Eigen::VectorXd x = grid.nodes();
  write_profile_csv(dir / "profile_fem.csv", x, traj.final_state.L,
                    traj.final_state.K);

  if (rep.wnl.regime == wnl::Regime::supercritical) {
    rep.mse = aligned_mse(traj.final_state, rep.wnl, head.eq, grid);
    const auto [pl, pk] = wnl::assemble_pattern(rep.wnl, head.eq, x);
    write_profile_csv(dir / "profile_wnl.csv", x, pl, pk);
  }

  write_report_json(dir / "report.json", cfg, rep);
  return rep;
}

std::vector<TableRow> table1(const std::vector<ExperimentConfig>& cfgs) {
  std::vector<TableRow> rows;
  for (const auto& cfg : cfgs) {
    TableRow row;
    row.name = cfg.name;
    try {
      const PipelineHead head = pipeline_head(cfg);
      const auto add = [&](const std::string& col, double derived) {
        TableCell cell;
        cell.column = col;
        cell.derived = derived;
        if (auto it = cfg.reference.find(col); it != cfg.reference.end()) {
          cell.reference = it->second.value;
          cell.tolerance = it->second.display_ulp;
          cell.matches =
              std::abs(derived - it->second.value) <= it->second.display_ulp;
        } else {
          cell.matches = true;
        }
        row.cells.push_back(cell);
      };
      add("alpha1", head.params.alpha1);
      add("alpha2", head.params.alpha2);
      add("beta1", head.params.beta1);
      add("beta2", head.params.beta2);
      add("L_star", head.eq.L_star);
      add("K_star", head.eq.K_star);
      add("b_c", head.stability.b_c);
      add("k_c", head.stability.k_c);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_table(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %-8s %14s %14s %12s  %s\n", "experiment",
                "column", "derived", "reference", "deviation", "ok");
  out << buf;
  for (const auto& row : rows) {
    if (row.failed) {
      out << row.name << "  FAILED: " << row.error << '\n';
      continue;
    }
    for (const auto& cell : row.cells) {
      if (cell.reference) {
        std::snprintf(buf, sizeof(buf), "%-10s %-8s %14s %14s %12s  %s\n",
                      row.name.c_str(), cell.column.c_str(),
                      fmt6(cell.derived).c_str(), fmt6(*cell.reference).c_str(),
                      fmt6(cell.derived - *cell.reference).c_str(),
                      cell.matches ? "yes" : "NO");
      } else {
        std::snprintf(buf, sizeof(buf), "%-10s %-8s %14s %14s %12s  %s\n",
                      row.name.c_str(), cell.column.c_str(),
                      fmt6(cell.derived).c_str(), "-", "-", "-");
      }
      out << buf;
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> dispersion_dump(
    const ExperimentConfig& cfg, std::vector<double> b_values,
    const std::filesystem::path& out_dir) {
  const PipelineHead head = pipeline_head(cfg);
  if (b_values.empty())
    b_values = {head.stability.b_c, cfg.b_multiplier * head.stability.b_c};

  const auto dir = out_dir / cfg.name;
  std::filesystem::create_directories(dir);
  const std::vector<double> grid = stability::default_k_grid(head.stability.k_c);

  std::vector<std::filesystem::path> files;
  int index = 0;
  for (double b : b_values) {
    const auto curve = stability::dispersion(head.params, head.eq, b, grid);
    const auto file =
        dir / ("dispersion_" + std::to_string(index++) + "_b" + fmt6(b) + ".csv");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "k,detAk,reLambda1,reLambda2\n";
    for (const auto& s : curve.samples)
      out << fmt17(s.k) << ',' << fmt17(s.det_Ak) << ',' << fmt17(s.re_lambda1)
          << ',' << fmt17(s.re_lambda2) << '\n';
    files.push_back(file);
  }
  return files;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& cfg,
                              const std::string& param, double a, double b,
                              int n, const std::filesystem::path& out_dir) {
  if (n < 1) throw std::invalid_argument("sweep: n >= 1 required");
  const bool scaled = cfg.diffusion.scaled_units;
  const bool diffusion_param = param.rfind("diffusion.", 0) == 0;
  if (diffusion_param && !scaled)
    throw std::invalid_argument("sweep: diffusion sweeps require scaled units");

  std::vector<SweepPoint> points;
  for (int i = 0; i < n; ++i) {
    const double value = n == 1 ? a : a + (b - a) * i / (n - 1);
    ExperimentConfig c = cfg;
    if (param == "gamma")
      c.gamma = value;
    else if (param == "b_multiplier")
      c.b_multiplier = value;
    else if (param == "diffusion.c1")
      c.diffusion.c1 = value;
    else if (param == "diffusion.c2")
      c.diffusion.c2 = value;
    else if (param == "diffusion.a1")
      c.diffusion.a1 = value;
    else if (param == "diffusion.a2")
      c.diffusion.a2 = value;
    else
      throw std::invalid_argument("sweep: unsupported parameter '" + param + "'");

    SweepPoint pt;
    pt.value = value;
    try {
      const PipelineHead head = pipeline_head(c);
      const wnl::WnlResult res = wnl::analyze(head.params, head.eq, head.b);
      pt.b_c = head.stability.b_c;
      pt.k_c = head.stability.k_c;
      pt.sigma = res.sigma;
      pt.ell = res.ell;
      pt.L_star = head.eq.L_star;
      pt.K_star = head.eq.K_star;
      pt.regime = res.regime == wnl::Regime::supercritical ? "supercritical"
                                                           : "subcritical";
    } catch (const std::exception&) {
      pt.failed = true;
    }
    points.push_back(pt);
  }

  const auto dir = out_dir / cfg.name;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "sweep.csv");
  if (!out) throw std::runtime_error("cannot write sweep.csv");
  out << "param,value,b_c,k_c,sigma,ell,regime,L_star,K_star,failed\n";
  for (const auto& pt : points) {
    out << param << ',' << fmt17(pt.value) << ',' << fmt17(pt.b_c) << ','
        << fmt17(pt.k_c) << ',' << fmt17(pt.sigma) << ',' << fmt17(pt.ell)
        << ',' << pt.regime << ',' << fmt17(pt.L_star) << ','
        << fmt17(pt.K_star) << ',' << (pt.failed ? 1 : 0) << '\n';
  }
  return points;
}

}  // namespace labcap::harness
