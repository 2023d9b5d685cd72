#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vmb/collision.hpp"

using namespace vmb;

TEST_CASE("collision frequency: exact value, brackets, asymptote") {
  double nu0 = collision_frequency(Eigen::Vector3d::Zero());
  CHECK(std::abs(nu0 - 4.0 * std::sqrt(2.0 * M_PI)) <= 1e-10);

  // hard-sphere brackets nu0(1+|v|) <= nu <= nu1(1+|v|), empirical constants
  double lo = 1e18, hi = 0.0;
  for (double z : {0.0, 0.3, 0.9, 1.7, 2.8, 4.0, 5.2, 6.0}) {
    double r = collision_frequency_radial(z) / (1.0 + z);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 20.0);

  double nu5 = collision_frequency(5.0 * Eigen::Vector3d::UnitX());
  CHECK(std::abs(nu5 / (2.0 * M_PI * 5.0) - 1.0) < 0.05);
}

TEST_CASE("collision frequency matches the 5-D defining-integral oracle") {
  for (const Eigen::Vector3d& v :
       {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0.7, -1.1, 0.4)}) {
    double impl = collision_frequency(v);
    double orc = oracle::nu_5d(v);
    CHECK(std::abs(impl - orc) / orc <= 1e-6);
  }
}

TEST_CASE("kernels: symmetry, rotation invariance, diagonal error") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::Vector3d v(d(rng), d(rng), d(rng)), w(d(rng), d(rng), d(rng));
    if ((v - w).norm() < 1e-6) continue;
    CHECK(kernel_k(v, w) == kernel_k(w, v));
    CHECK(kernel_k1(v, w) == kernel_k1(w, v));
  }
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector3d v(d(rng), d(rng), d(rng)), w(d(rng), d(rng), d(rng));
    Eigen::Quaterniond q = Eigen::Quaterniond::UnitRandom();
    Eigen::Matrix3d R = q.toRotationMatrix();
    double a = kernel_k(v, w), b = kernel_k(R * v, R * w);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
  CHECK_THROWS_AS(kernel_k(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()), Error);
}

TEST_CASE("kernel value at (0, e1) pinned by the bump oracle") {
  double k_impl = kernel_k(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX());
  double k1_impl = kernel_k1(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX());
  double k_orc = oracle::kernel_value_at_0_e1();
  double k1_orc = oracle::kernel1_value_at_0_e1();
  CHECK(std::abs(k1_impl - k1_orc) / std::abs(k1_orc) <= 1e-4);
  CHECK(std::abs(k_impl - k_orc) / std::abs(k_orc) <= 1e-4);
}

TEST_CASE("closed-form kernels match the defining integral on Gaussian test functions") {
  // quadrature of the closed-form kernels against the 5-D defining integral;
  // this pins the derived constants independently of the production grid
  auto cm = vmbtest::cm12();
  const VelocityGrid& g = *cm->grid;
  auto gfun = [](const Eigen::Vector3d& x) {
    return std::exp(-(x - Eigen::Vector3d(0.3, -0.2, 0.5)).squaredNorm() / 3.0);
  };
  std::vector<int> picks;
  for (int a = 0, skip = 0; a < g.size() && static_cast<int>(picks.size()) < 20; ++a)
    if (g.nodes[a].norm() < 3.0 && ++skip % 3 == 0) picks.push_back(a);
  REQUIRE(picks.size() >= 20);
  double worst_k = 0.0, worst_k1 = 0.0;
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < picks.size(); ++i) {
    int a = picks[i];
    double impl_k = oracle::K_closed_quad(g.nodes[a], gfun);
    double impl_k1 = oracle::K1_closed_quad(g.nodes[a], gfun);
    double orc_k = oracle::K_defining(g.nodes[a], gfun);
    double orc_k1 = oracle::K1_defining(g.nodes[a], gfun);
#pragma omp critical
    {
      worst_k = std::max(worst_k, std::abs(impl_k - orc_k) / std::abs(orc_k));
      worst_k1 = std::max(worst_k1, std::abs(impl_k1 - orc_k1) / std::abs(orc_k1));
    }
  }
  CHECK(worst_k1 <= 1e-4);
  CHECK(worst_k <= 1e-4);

  // the assembled matrices sample the same kernels on the tensor grid; their
  // pointwise action carries the grid's near-singular quadrature defect
  GridFunction gv(g.size());
  for (int a = 0; a < g.size(); ++a) gv[a] = gfun(g.nodes[a]);
  VecC kg = cm->K.cast<cd>() * (g.sqrtw.asDiagonal() * gv).eval();
  double worst_grid = 0.0;
  for (size_t i = 0; i < picks.size(); ++i) {
    int a = picks[i];
    double impl = std::real(kg[a]) / g.sqrtw[a];
    double orc = oracle::K_closed_quad(g.nodes[a], gfun);
    worst_grid = std::max(worst_grid, std::abs(impl - orc) / std::abs(orc));
  }
  CHECK(worst_grid <= 0.1);
}

TEST_CASE("assembly invariants: self-adjoint, exact null spaces, coercivity") {
  auto cm = vmbtest::cm12();
  const VelocityGrid& g = *cm->grid;
  CHECK((cm->K - cm->K.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((cm->L - cm->L.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  for (int j = 0; j < 5; ++j) CHECK((cm->L * g.q.col(j)).norm() <= 1e-12 * cm->diag.norm_L);
  CHECK((cm->L1 * g.q.col(0)).norm() <= 1e-12 * cm->diag.norm_L1);
  // raw quadrature defect: small relative to ||L|| and decreasing in n
  CHECK(cm->diag.eps_null_L <= 1e-2 * cm->diag.norm_L);
  CHECK(cm->diag.mu_L > 0.0);
  CHECK(cm->diag.mu_L1 > 0.0);

  // raw null residual decreases under refinement
  CHECK(vmbtest::cm16()->diag.eps_null_L < cm->diag.eps_null_L);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  for (int rep = 0; rep < 100; ++rep) {
    VecR f(g.size());
    for (int a = 0; a < g.size(); ++a) f[a] = d(rng) * std::sqrt(maxwellian(g.nodes[a]));
    CHECK(f.dot(cm->L * f) <= 1e-12 * cm->diag.norm_L * f.squaredNorm());
    CHECK(f.dot(cm->L1 * f) <= 1e-12 * cm->diag.norm_L1 * f.squaredNorm());
  }
}

TEST_CASE("spectral gap stable under refinement") {
  double mu12 = vmbtest::cm12()->diag.mu_L;
  double mu16 = vmbtest::cm16()->diag.mu_L;
  CHECK(std::abs(mu12 - mu16) / mu16 < 0.05);
}

TEST_CASE("solve_L_inverse: null rhs, sign, isotropy") {
  auto cm = vmbtest::cm12();
  const VelocityGrid& g = *cm->grid;
  CHECK(solve_L_inverse(chi(0, g), Species::one, *cm).norm() == 0.0);

  GridFunction c2 = chi(2, g);
  GridFunction x = solve_L_inverse(c2, Species::two, *cm);
  double m22 = std::real(inner_product(x, c2, g));
  CHECK(m22 < 0.0);

  auto vchi = [&](int axis, int j) {
    GridFunction f(g.size());
    for (int a = 0; a < g.size(); ++a) f[a] = g.nodes[a][axis] * g.chi(a, j);
    return f;
  };
  GridFunction r2 = vchi(0, 2), r3 = vchi(0, 3);
  double w2 = std::real(inner_product(solve_L_inverse(r2, Species::one, *cm), r2, g));
  double w3 = std::real(inner_product(solve_L_inverse(r3, Species::one, *cm), r3, g));
  CHECK(std::abs(w2 - w3) <= 1e-6 * std::abs(w2));

  double k1 = 0.0;
  for (int i = 1; i <= 3; ++i) {
    GridFunction ci = chi(i, g);
    double mi = std::real(inner_product(solve_L_inverse(ci, Species::two, *cm), ci, g));
    if (i == 1) k1 = mi;
    CHECK(std::abs(mi - k1) <= 1e-6 * std::abs(k1));
  }
}

TEST_CASE("transport coefficients: positivity, identities, refinement stability") {
  auto cm12 = vmbtest::cm12();
  TransportCoefficients tc = transport_coefficients(*cm12, *cm12);
  CHECK(tc.kappa1 > 0.0);
  CHECK(tc.kappa2 > 0.0);
  CHECK(tc.kappa3 > 0.0);

  // kappa3 * a1(two) = 1: both reduce to (L1^{-1} chi_i, chi_i) by isotropy
  const VelocityGrid& g = *cm12->grid;
  GridFunction c2 = chi(2, g);
  double m = std::real(inner_product(solve_L_inverse(c2, Species::two, *cm12), c2, g));
  double a1_two = -1.0 / m;
  CHECK(std::abs(tc.kappa3 * a1_two - 1.0) <= 1e-6);

  TransportCoefficients tr = transport_coefficients(*vmbtest::cm16(), *vmbtest::cm16());
  CHECK(std::abs(tc.kappa1 - tr.kappa1) / tr.kappa1 < 0.02);
  CHECK(std::abs(tc.kappa2 - tr.kappa2) / tr.kappa2 < 0.02);
  CHECK(std::abs(tc.kappa3 - tr.kappa3) / tr.kappa3 < 0.02);
}

TEST_CASE("parallel assembly agrees with the serial reference bitwise") {
  auto grid = vmbtest::grid(6);
  AssembleOptions par, ser;
  par.parallel = true;
  ser.parallel = false;
  par.check_coercivity = ser.check_coercivity = false;
  CollisionMatrices a = assemble(grid, par);
  CollisionMatrices b = assemble(grid, ser);
  CHECK((a.K - b.K).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.L1 - b.L1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.nu - b.nu).cwiseAbs().maxCoeff() == 0.0);
}
