#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "labcap/harness.hpp"

namespace hn = labcap::harness;

namespace {

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("LABCAP_OUTDIR"); env && *env)
    return env;
  return "labcap_out";
}

int run_cmd(const std::string& target, const std::filesystem::path& out) {
  const hn::ExperimentConfig cfg = hn::resolve_config(target);
  const hn::ComparisonReport rep = hn::run_experiment(cfg, out);
  std::printf("%s: b_c=%.6g k_c=%.6g b=%.6g L*=%.6g K*=%.6g\n",
              rep.name.c_str(), rep.stability.b_c, rep.stability.k_c, rep.b,
              rep.eq.L_star, rep.eq.K_star);
  std::printf("  sigma=%.6g ell=%.6g regime=%s", rep.wnl.sigma, rep.wnl.ell,
              rep.wnl.regime == labcap::wnl::Regime::supercritical
                  ? "supercritical"
                  : "subcritical");
  if (rep.wnl.A_inf) std::printf(" A_inf=%.6g", *rep.wnl.A_inf);
  std::printf("\n");
  if (rep.T_s)
    std::printf("  steady at T_s=%.6g (%ld steps)\n", *rep.T_s,
                static_cast<long>(*rep.T_s / cfg.solver.tau + 0.5));
  else
    std::printf("  no steady state within %ld steps (t=%.6g)\n",
                cfg.solver.max_steps, rep.t_final);
  if (rep.dominant_mode)
    std::printf("  dominant mode k=%.6g\n", *rep.dominant_mode);
  if (rep.mse) std::printf("  mse=%.6g\n", *rep.mse);
  if (rep.negativity_warning)
    std::printf("  warning: negative nodal values encountered\n");
  std::printf("  artifacts: %s\n", (out / cfg.name).string().c_str());
  return hn::kExitOk;
}

int table1_cmd(const std::vector<std::string>& names,
               const std::filesystem::path& out) {
  std::vector<hn::ExperimentConfig> cfgs;
  for (const auto& n : names) cfgs.push_back(hn::resolve_config(n));
  const auto rows = hn::table1(cfgs);
  std::cout << hn::format_table(rows);

  std::filesystem::create_directories(out);
  std::ofstream csv(out / "table1.csv");
  csv << "experiment,column,derived,reference,deviation,matches\n";
  bool any_failed = false, any_mismatch = false;
  for (const auto& row : rows) {
    if (row.failed) {
      any_failed = true;
      csv << row.name << ",error,,,,\n";
      continue;
    }
    for (const auto& cell : row.cells) {
      char buf[200];
      if (cell.reference) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%d\n",
                      row.name.c_str(), cell.column.c_str(), cell.derived,
                      *cell.reference, cell.derived - *cell.reference,
                      cell.matches ? 1 : 0);
        if (!cell.matches) any_mismatch = true;
      } else {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,,,\n", row.name.c_str(),
                      cell.column.c_str(), cell.derived);
      }
      csv << buf;
    }
  }
  if (any_failed) return hn::kExitStageError;
  if (any_mismatch) return hn::kExitComparisonError;
  return hn::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labor/capital cross-diffusion pattern laboratory"};
  app.require_subcommand(1);

  std::filesystem::path out = default_out_dir();
  app.add_option("--out", out, "output directory (default $LABCAP_OUTDIR or ./labcap_out)");

  std::string target;
  auto* run = app.add_subcommand("run", "run the full pipeline for a preset or config file");
  run->add_option("experiment", target, "preset name or config path")->required();

  std::vector<std::string> table_names = {"exp1", "exp2", "exp3", "exp4"};
  auto* table = app.add_subcommand("table1", "derived coefficients vs reference values");
  table->add_option("--preset", table_names, "presets/configs to include");

  std::string disp_target;
  std::vector<double> b_values;
  auto* disp = app.add_subcommand("dispersion", "determinant and growth-rate curves");
  disp->add_option("experiment", disp_target, "preset name or config path")->required();
  disp->add_option("--b", b_values, "bifurcation parameter values (default b_c and multiplier*b_c)");

  std::string sweep_target, sweep_param, sweep_range;
  auto* sw = app.add_subcommand("sweep", "sweep one parameter");
  sw->add_option("experiment", sweep_target, "preset name or config path")->required();
  sw->add_option("--param", sweep_param, "gamma | b_multiplier | diffusion.{c1,c2,a1,a2}")->required();
  sw->add_option("--range", sweep_range, "a:b:n")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_cmd(target, out);
    if (table->parsed()) return table1_cmd(table_names, out);
    if (disp->parsed()) {
      const auto cfg = hn::resolve_config(disp_target);
      const auto files = hn::dispersion_dump(cfg, b_values, out);
      for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
      return hn::kExitOk;
    }
    if (sw->parsed()) {
      double a = 0, b = 0;
      int n = 0;
      if (std::sscanf(sweep_range.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3)
        throw std::invalid_argument("sweep: --range expects a:b:n");
      const auto cfg = hn::resolve_config(sweep_target);
      const auto points = hn::sweep(cfg, sweep_param, a, b, n, out);
      for (const auto& pt : points) {
        if (pt.failed)
          std::printf("%s=%.6g: failed\n", sweep_param.c_str(), pt.value);
        else
          std::printf("%s=%.6g: b_c=%.6g k_c=%.6g sigma=%.6g ell=%.6g %s\n",
                      sweep_param.c_str(), pt.value, pt.b_c, pt.k_c, pt.sigma,
                      pt.ell, pt.regime.c_str());
      }
      return hn::kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return hn::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return hn::kExitStageError;
  }
  return hn::kExitOk;
}
