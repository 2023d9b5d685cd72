// Command-line front end: coefficient tables, dispersion branches, mode
// spectra, spectral-gap scans, decay experiments and the validation suite.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vmb/config.hpp"
#include "vmb/csv.hpp"
#include "vmb/dispersion.hpp"
#include "vmb/semigroup.hpp"
#include "vmb/spectra.hpp"
#include "vmb/validate.hpp"

extern "C" void openblas_set_num_threads(int);

namespace vmb {
namespace {

std::string outpath(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::shared_ptr<const CollisionMatrices> assemble_shared(int n, double scale,
                                                         bool keep_K = true) {
  auto grid = std::make_shared<const VelocityGrid>(build_grid(n, scale));
  AssembleOptions opts;
  opts.keep_K = keep_K;
  return std::make_shared<const CollisionMatrices>(assemble(grid, opts));
}

int cmd_coeffs(const RunConfig& cfg) {
  auto cm = assemble_shared(cfg.n_per_axis, cfg.scale);
  SpectrumCoefficients sc = asymptotic_coefficients(*cm, *cm);
  auto cmr = assemble_shared(cfg.refine_n, cfg.scale, false);
  SpectrumCoefficients scr = asymptotic_coefficients(*cmr, *cmr);

  double identity = sc.kappa3 * sc.a1_two;
  std::vector<std::pair<std::string, std::pair<double, double>>> rows = {
      {"a0", {sc.a0, scr.a0}},         {"a1", {sc.a1, scr.a1}},
      {"a2", {sc.a2, scr.a2}},         {"a3", {sc.a3, scr.a3}},
      {"b1", {sc.b1, scr.b1}},         {"b2", {sc.b2, scr.b2}},
      {"a1_two", {sc.a1_two, scr.a1_two}}, {"kappa1", {sc.kappa1, scr.kappa1}},
      {"kappa2", {sc.kappa2, scr.kappa2}}, {"kappa3", {sc.kappa3, scr.kappa3}},
  };
  CsvWriter csv(outpath(cfg, "coeffs.csv"), {"name", "value", "refinement_delta"}, cfg.hash());
  std::printf("%-8s %-22s %-22s %s\n", "name", "value", "refined", "delta%%");
  for (auto& [name, v] : rows) {
    double delta = v.second - v.first;
    csv.row({name, fmt17(v.first), fmt17(delta)});
    std::printf("%-8s %-22.15g %-22.15g %+.3f%%\n", name.c_str(), v.first, v.second,
                100.0 * delta / v.first);
  }
  std::printf("kappa3 * a1_two = %.12f (target 1)\n", identity);
  if (std::abs(identity - 1.0) > 1e-6) {
    std::fprintf(stderr, "coeffs: identity kappa3*a1_two failed: %.3e\n",
                 std::abs(identity - 1.0));
    return 1;
  }
  return 0;
}

struct BranchSpec {
  std::function<cd(cd, double)> dfun;
  cd seed;
  int multiplicity = 1;
  std::string label;
};

BranchSpec select_branch(const RunConfig& cfg, DispersionEvaluator& ev,
                         const SpectrumCoefficients& sc, int index) {
  const double s0 = cfg.s_min;
  const cd I(0, 1);
  if (cfg.branch == "low") {
    if (cfg.species != "two") throw ConfigError("branch low is the two-species D1 branch");
    return {[&ev](cd l, double s) { return ev.D_two_low1(l, s); },
            cd(-sc.a1_two * s0 * s0, 0), 2, "two_low_D1"};
  }
  if (cfg.branch == "detm") {
    if (index == 0)
      return {[&ev](cd l, double s) { return ev.detM_one(l, s); }, cd(-sc.a0 * s0 * s0, 0), 1,
              "one_detM_0"};
    cd seed = cd(0, index) + cd(-sc.a1, index * sc.b1) * s0 * s0;
    return {[&ev](cd l, double s) { return ev.detM_one(l, s); }, seed, 1,
            index > 0 ? "one_detM_p1" : "one_detM_m1"};
  }
  if (cfg.branch == "d0") {
    if (index == 0)
      return {[&ev](cd l, double s) { return ev.D_one_low(l, s); },
              cd(-sc.a3 * s0 * s0 * s0 * s0, 0), 2, "one_D0_s4"};
    cd seed = cd(0, index) + cd(-sc.a2, index * sc.b2) * s0 * s0;
    return {[&ev](cd l, double s) { return ev.D_one_low(l, s); }, seed, 2,
            index > 0 ? "one_D0_p1" : "one_D0_m1"};
  }
  if (cfg.branch == "high") {
    Species sp = cfg.species == "two" ? Species::two : Species::one;
    if (index == 0) throw ConfigError("branch high needs index +1 or -1");
    return {[&ev, sp](cd l, double s) { return ev.D_high(sp, l, s); }, cd(0, index * s0), 2,
            std::string("high_") + (index > 0 ? "p1" : "m1")};
  }
  throw ConfigError("unknown branch " + cfg.branch);
}

int cmd_branch(const RunConfig& cfg, int index) {
  auto cm = assemble_shared(cfg.spectral_n, cfg.scale);
  DispersionEvaluator ev(cm);
  SpectrumCoefficients sc = asymptotic_coefficients(*cm, *cm);
  BranchSpec bs = select_branch(cfg, ev, sc, index);

  std::vector<double> sgrid(cfg.steps);
  for (int k = 0; k < cfg.steps; ++k)
    sgrid[k] = cfg.s_min * std::pow(cfg.s_max / cfg.s_min, double(k) / (cfg.steps - 1));
  DispersionBranch br = trace_branch(bs.dfun, sgrid, bs.seed, bs.label, bs.multiplicity);

  CsvWriter csv(outpath(cfg, "branch.csv"),
                {"s", "re_lambda", "im_lambda", "residual", "converged", "multiplicity"},
                cfg.hash());
  int converged = 0;
  for (size_t k = 0; k < br.s.size(); ++k) {
    csv.row({fmt17(br.s[k]), fmt17(br.lambda[k].real()), fmt17(br.lambda[k].imag()),
             fmt17(br.residual[k]), br.converged[k] ? "1" : "0",
             std::to_string(br.multiplicity)});
    converged += br.converged[k];
  }
  std::printf("branch %s: %d/%d points converged%s\n", br.label.c_str(), converged,
              static_cast<int>(sgrid.size()), br.complete ? "" : " (partial)");
  return converged == 0 ? 1 : 0;
}

int cmd_spectrum(const RunConfig& cfg) {
  auto cm = assemble_shared(cfg.spectral_n, cfg.scale);
  ModeSpecies sp = cfg.species == "two" ? ModeSpecies::two_species : ModeSpecies::one_species;
  ModeOperator op = assemble_mode(sp, cfg.spectrum_s, Frame::canonical(), *cm);
  SpectrumReport rep = eig_all(op);

  std::vector<int> order(rep.eigenvalues.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return rep.eigenvalues[a].real() > rep.eigenvalues[b].real();
  });
  CsvWriter csv(outpath(cfg, "spectrum.csv"),
                {"s", "index", "re_lambda", "im_lambda", "residual"}, cfg.hash());
  const double backward = 1e-14 * rep.op_norm;
  for (size_t r = 0; r < order.size(); ++r) {
    cd l = rep.eigenvalues[order[r]];
    double resid = backward;
    for (const auto& vp : rep.validated)
      if (std::abs(vp.value - l) < 1e-12 * (1 + std::abs(l))) resid = vp.residual;
    csv.row({fmt17(cfg.spectrum_s), std::to_string(r), fmt17(l.real()), fmt17(l.imag()),
             fmt17(resid)});
  }
  std::printf("spectrum: %d eigenvalues at s=%g, rightmost Re = %.6g\n",
              static_cast<int>(order.size()), cfg.spectrum_s, rep.rightmost.real());
  return 0;
}

int cmd_gap(const RunConfig& cfg) {
  auto cm = assemble_shared(cfg.spectral_n, cfg.scale);
  ModeSpecies sp = cfg.species == "two" ? ModeSpecies::two_species : ModeSpecies::one_species;
  std::vector<double> ss(cfg.gap_steps);
  for (int k = 0; k < cfg.gap_steps; ++k)
    ss[k] = (cfg.gap_steps == 1)
                ? cfg.gap_s_min
                : cfg.gap_s_min *
                      std::pow(cfg.gap_s_max / cfg.gap_s_min, double(k) / (cfg.gap_steps - 1));
  auto rows = gap_scan(sp, *cm, ss);
  CsvWriter csv(outpath(cfg, "gap.csv"), {"s", "rightmost_re"}, cfg.hash());
  double alpha = -1e18;
  for (auto& r : rows) {
    csv.row({fmt17(r.s), fmt17(r.rightmost_re)});
    alpha = std::max(alpha, r.rightmost_re);
  }
  std::printf("gap scan: alpha_emp = %.6g over %d points\n", -alpha,
              static_cast<int>(rows.size()));
  return 0;
}

struct Target {
  const char* channel;
  double slope;
  double tol;
  bool semilog;
};

std::vector<Target> targets_for(Scenario sc) {
  switch (sc) {
    case Scenario::two_species_field:
      return {{"f", -1.25, 0.08, false},
              {"E", -1.25, 0.08, false},
              {"B", -0.75, 0.08, false},
              {"pr", -1.25, 0.08, false},
              {"pd", 0.0, 0.0, true}};  // exponential: semilog slope < 0
    case Scenario::boltzmann:
      return {{"f", -0.75, 0.08, false},
              {"density", -0.75, 0.08, false},
              {"momentum", -0.75, 0.08, false},
              {"energy", -0.75, 0.08, false},
              {"micro", -1.25, 0.08, false}};
    case Scenario::one_magnetic:
      return {{"f", -0.625, 0.08, false},  {"E", -0.75, 0.08, false},
              {"B", -0.375, 0.08, false},  {"density", -1.25, 0.08, false},
              {"momentum", -0.625, 0.08, false}, {"energy", -0.75, 0.08, false},
              {"micro", -0.875, 0.10, false}};
    case Scenario::one_electric:
      return {{"f", -0.25, 0.08, false},
              {"E", -0.25, 0.08, false},
              {"B", -0.375, 0.08, false},
              {"density", -0.75, 0.08, false},
              {"momentum", -0.25, 0.08, false},
              {"energy", -0.75, 0.08, false}};
  }
  return {};
}

const std::vector<double>* channel_of(const DecayCurve& dc, const std::string& name) {
  if (name == "f") return &dc.f;
  if (name == "E") return &dc.E;
  if (name == "B") return &dc.B;
  if (name == "density") return &dc.density;
  if (name == "momentum") return &dc.momentum;
  if (name == "energy") return &dc.energy;
  if (name == "micro") return &dc.micro;
  if (name == "pd") return &dc.pd;
  if (name == "pr") return &dc.pr;
  return nullptr;
}

int cmd_decay(const RunConfig& cfg) {
  ExperimentConfig ec;
  ec.scenario = scenario_from_name(cfg.scenario);
  ec.n_per_axis = cfg.spectral_n;
  ec.grid_scale = cfg.scale;
  ec.s_min = cfg.xi_min;
  ec.s_max = cfg.xi_max;
  ec.radial_nodes = cfg.radial_nodes;
  ec.directions = cfg.directions;
  ec.t_max = cfg.t_max;
  ec.time_samples = cfg.time_samples;
  ec.params = {cfg.d0, cfg.r0};

  auto cm = assemble_shared(cfg.spectral_n, cfg.scale);
  DecayCurve dc = synthesize_decay(ec, *cm);

  CsvWriter csv(outpath(cfg, "decay.csv"),
                {"t", "norm_f", "norm_E", "norm_B", "norm_density", "norm_momentum",
                 "norm_energy", "norm_micro", "norm_pd", "norm_pr"},
                cfg.hash());
  auto cell = [&](const std::vector<double>& v, size_t k) {
    return v.empty() ? std::string() : fmt17(v[k]);
  };
  for (size_t k = 0; k < dc.t.size(); ++k)
    csv.row({fmt17(dc.t[k]), cell(dc.f, k), cell(dc.E, k), cell(dc.B, k), cell(dc.density, k),
             cell(dc.momentum, k), cell(dc.energy, k), cell(dc.micro, k), cell(dc.pd, k),
             cell(dc.pr, k)});

  std::printf("scenario %s: %d modes (%d failed)\n", scenario_name(dc.scenario), dc.total_modes,
              dc.failed_modes);
  std::printf("%-10s %-10s %-10s %-10s %s\n", "channel", "slope", "stderr", "target", "verdict");
  for (const Target& tg : targets_for(dc.scenario)) {
    const auto* ch = channel_of(dc, tg.channel);
    if (!ch || ch->empty()) continue;
    double lo = tg.semilog ? cfg.pd_fit_lo : cfg.fit_lo;
    double hi = tg.semilog ? cfg.pd_fit_hi : cfg.fit_hi;
    FitResult fr = fit_exponent(dc.t, *ch, lo, hi, tg.semilog ? FitMode::semilog : FitMode::loglog);
    bool pass = tg.semilog ? fr.slope < 0.0 : std::abs(fr.slope - tg.slope) <= tg.tol;
    if (tg.semilog)
      std::printf("%-10s %-10.4f %-10.2e %-10s %s\n", tg.channel, fr.slope, fr.stderr_,
                  "exp(<0)", pass ? "pass" : "FAIL");
    else
      std::printf("%-10s %-10.4f %-10.2e %-10.3f %s\n", tg.channel, fr.slope, fr.stderr_,
                  tg.slope, pass ? "pass" : "FAIL");
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  auto results = run_validation(cfg);
  std::string first_fail;
  for (const auto& r : results) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.pass && first_fail.empty()) first_fail = r.name;
  }
  if (!first_fail.empty()) {
    std::printf("VALIDATION FAILED at %s\n", first_fail.c_str());
    return 1;
  }
  std::printf("VALIDATION PASSED (%d checks)\n", static_cast<int>(results.size()));
  return 0;
}

}  // namespace
}  // namespace vmb

int main(int argc, char** argv) {
  openblas_set_num_threads(1);
  CLI::App app{"linearized Vlasov-Maxwell-Boltzmann spectrum and decay toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, species, scenario, branch;
  double smin = -1, smax = -1, tmax = -1;
  int steps = -1, threads = -1, branch_index = 0;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (key = value sections)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--species", species, "two|one");
    sub->add_option("--scenario", scenario, "decay scenario");
    sub->add_option("--smin", smin, "lower s bound");
    sub->add_option("--smax", smax, "upper s bound");
    sub->add_option("--steps", steps, "number of s points");
    sub->add_option("--tmax", tmax, "final time");
    sub->add_option("--threads", threads, "OpenMP thread count");
    sub->add_option("--seed", seed, "seed for randomized checks");
    sub->add_option("--branch-index", branch_index, "branch index (-1, 0, +1)");
    sub->add_option("--branch", branch, "low|detm|d0|high");
  };
  CLI::App* sub_coeffs = app.add_subcommand("coeffs", "asymptotic and transport coefficients");
  CLI::App* sub_branch = app.add_subcommand("branch", "trace a dispersion branch");
  CLI::App* sub_spec = app.add_subcommand("spectrum", "dense mode spectrum");
  CLI::App* sub_gap = app.add_subcommand("gap", "intermediate-frequency gap scan");
  CLI::App* sub_decay = app.add_subcommand("decay", "mode-summed decay experiment");
  CLI::App* sub_val = app.add_subcommand("validate", "run the invariant suite");
  for (auto* s : {sub_coeffs, sub_branch, sub_spec, sub_gap, sub_decay, sub_val}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    vmb::RunConfig cfg =
        config_path.empty() ? vmb::RunConfig{} : vmb::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!species.empty()) cfg.species = species;
    if (!scenario.empty()) cfg.scenario = scenario;
    if (!branch.empty()) cfg.branch = branch;
    if (smin > 0) {
      cfg.s_min = smin;
      cfg.gap_s_min = smin;
      cfg.xi_min = smin;
    }
    if (smax > 0) {
      cfg.s_max = smax;
      cfg.gap_s_max = smax;
      cfg.xi_max = smax;
    }
    if (steps > 0) {
      cfg.steps = steps;
      cfg.gap_steps = steps;
    }
    if (tmax > 0) cfg.t_max = tmax;
    if (threads >= 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    vmb::validate_ranges(cfg);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    if (app.got_subcommand(sub_coeffs)) return vmb::cmd_coeffs(cfg);
    if (app.got_subcommand(sub_branch)) return vmb::cmd_branch(cfg, branch_index);
    if (app.got_subcommand(sub_spec)) return vmb::cmd_spectrum(cfg);
    if (app.got_subcommand(sub_gap)) return vmb::cmd_gap(cfg);
    if (app.got_subcommand(sub_decay)) return vmb::cmd_decay(cfg);
    if (app.got_subcommand(sub_val)) return vmb::cmd_validate(cfg);
  } catch (const vmb::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
