// Timing harness comparing the OpenMP kernels against their serial reference
// implementations: collision assembly and the mode-summed decay synthesis.

#include <omp.h>

#include <cstdio>

#include "vmb/semigroup.hpp"

extern "C" void openblas_set_num_threads(int);

using namespace vmb;

namespace {

template <typename F>
double timed(F&& f) {
  double t0 = omp_get_wtime();
  f();
  return omp_get_wtime() - t0;
}

}  // namespace

int main(int argc, char** argv) {
  openblas_set_num_threads(1);
  int n = argc > 1 ? std::atoi(argv[1]) : 10;
  std::printf("threads: %d, assembly grid n=%d\n", omp_get_max_threads(), n);

  auto grid = std::make_shared<const VelocityGrid>(build_grid(n, 1.0));
  AssembleOptions par, ser;
  par.parallel = true;
  ser.parallel = false;
  par.check_coercivity = ser.check_coercivity = false;

  CollisionMatrices cm_par, cm_ser;
  double t_par = timed([&] { cm_par = assemble(grid, par); });
  double t_ser = timed([&] { cm_ser = assemble(grid, ser); });
  double dk = (cm_par.K - cm_ser.K).cwiseAbs().maxCoeff();
  std::printf("collision assembly: serial %.3f s, openmp %.3f s, speedup %.2fx, max |dK| = %g\n",
              t_ser, t_par, t_ser / t_par, dk);

  ExperimentConfig cfg;
  cfg.scenario = Scenario::two_species_field;
  cfg.n_per_axis = n >= 8 ? 8 : n;
  cfg.radial_nodes = 12;
  cfg.time_samples = 16;
  cfg.t_max = 100.0;
  auto sgrid = std::make_shared<const VelocityGrid>(build_grid(cfg.n_per_axis, 1.0));
  CollisionMatrices scm = assemble(sgrid);

  DecayCurve d_par, d_ser;
  double s_par = timed([&] { d_par = synthesize_decay(cfg, scm, true); });
  double s_ser = timed([&] { d_ser = synthesize_decay(cfg, scm, false); });
  double df = 0.0;
  for (size_t k = 0; k < d_par.t.size(); ++k) df = std::max(df, std::abs(d_par.f[k] - d_ser.f[k]));
  std::printf("decay synthesis (%d modes): serial %.3f s, openmp %.3f s, speedup %.2fx, max |df| = %g\n",
              d_par.total_modes, s_ser, s_par, s_ser / s_par, df);
  return 0;
}
