#include "vmb/collision.hpp"

#include <lapacke.h>
#include <omp.h>

#include <cmath>

namespace vmb {

namespace {

// 40-point Gauss-Legendre rule on [0,1], generated once.
struct Gl40 {
  std::array<double, 40> x{}, w{};
  Gl40() {
    std::vector<double> d(40, 0.0), e(39), z(40 * 40);
    for (int k = 1; k < 40; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', 40, d.data(), e.data(), z.data(), 40);
    for (int i = 0; i < 40; ++i) {
      x[i] = 0.5 * (d[i] + 1.0);
      w[i] = z[i * 40] * z[i * 40];  // weights sum to 2, halved by the map
    }
  }
};
const Gl40& gl40() {
  static const Gl40 g;
  return g;
}

double sphere_avg_dist(double zeta, double r) {
  // int_{S^2} |zeta e - r sigma| dsigma for unit e
  double mx = std::max(zeta, r), mn = std::min(zeta, r);
  if (mx == 0.0) return 0.0;
  return 2.0 * M_PI * (2.0 * mx + 2.0 / 3.0 * mn * mn / mx);
}

}  // namespace

double collision_frequency_radial(double speed) {
  const double zeta = std::abs(speed);
  const double up = std::max(zeta + 12.0, 14.0);
  const auto& g = gl40();
  auto seg = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < 40; ++i) {
      double r = a + (b - a) * g.x[i];
      double m = std::pow(2.0 * M_PI, -1.5) * std::exp(-0.5 * r * r);
      s += (b - a) * g.w[i] * r * r * m * sphere_avg_dist(zeta, r);
    }
    return s;
  };
  double q = (zeta > 0.0 && zeta < up) ? seg(0.0, zeta) + seg(zeta, up) : seg(0.0, up);
  return 2.0 * M_PI * q;
}

double collision_frequency(const Eigen::Vector3d& v) {
  return collision_frequency_radial(v.norm());
}

double kernel_k1(const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
  double d = (v - w).norm();
  if (d == 0.0) throw Error("kernel_k1: diagonal singularity v == w");
  double s = (v.squaredNorm() - w.squaredNorm()) / d;
  return 2.0 / std::sqrt(2.0 * M_PI) * std::exp(-0.125 * d * d - 0.125 * s * s) / d;
}

double kernel_k(const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
  double d = (v - w).norm();
  if (d == 0.0) throw Error("kernel_k: diagonal singularity v == w");
  double loss =
      1.0 / std::sqrt(2.0 * M_PI) * d * std::exp(-0.25 * (v.squaredNorm() + w.squaredNorm()));
  return 2.0 * kernel_k1(v, w) - loss;
}

namespace {

void fill_kernel_rows(const VelocityGrid& g, MatR& K, MatR& K1, bool parallel) {
  const int n = g.size();
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double sw = g.sqrtw[a] * g.sqrtw[b];
      double k1 = kernel_k1(g.nodes[a], g.nodes[b]);
      double d = (g.nodes[a] - g.nodes[b]).norm();
      double loss = 1.0 / std::sqrt(2.0 * M_PI) * d *
                    std::exp(-0.25 * (g.nodes[a].squaredNorm() + g.nodes[b].squaredNorm()));
      K1(a, b) = sw * k1;
      K(a, b) = sw * (2.0 * k1 - loss);
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      K1(b, a) = K1(a, b);
      K(b, a) = K(a, b);
    }
}

// P <- (I - QQ^T) P (I - QQ^T), symmetrized
void project_out(MatR& m, const Eigen::Ref<const MatR>& q) {
  MatR tmp = q.transpose() * m;
  m.noalias() -= q * tmp;
  tmp = m * q;
  m.noalias() -= tmp * q.transpose();
  m = 0.5 * (m + m.transpose()).eval();
}

}  // namespace

CollisionMatrices assemble(std::shared_ptr<const VelocityGrid> grid, const AssembleOptions& opts) {
  const VelocityGrid& g = *grid;
  const int n = g.size();
  CollisionMatrices cm;
  cm.grid = grid;
  cm.nu.resize(n);

#pragma omp parallel for schedule(static) if (opts.parallel)
  for (int a = 0; a < n; ++a) cm.nu[a] = collision_frequency(g.nodes[a]);

  cm.K.setZero(n, n);
  cm.K1.setZero(n, n);
  fill_kernel_rows(g, cm.K, cm.K1, opts.parallel);

  // Diagonal calibration: the |v-w|^{-1} singularity is integrable, and the
  // mass the quadrature misses near the diagonal is assigned to the diagonal
  // entry via the row identity K chi_0 = nu chi_0 (same for K1).  Far-tail
  // rows capture almost none of their gain integral; there the deficit
  // belongs to off-grid regions, not to the node itself, and calibrating
  // would plant spurious near-null tail modes (L_aa ~ 0).  Those rows are
  // left loss-dominated; their chi_0 amplitude is exponentially negligible.
  VecR c0 = g.sqrtw.asDiagonal() * g.chi.col(0);
  for (int a = 0; a < n; ++a) {
    double sk = 0.0, sk1 = 0.0;
    for (int b = 0; b < n; ++b) {
      sk += cm.K(a, b) * c0[b];
      sk1 += cm.K1(a, b) * c0[b];
    }
    double captured = sk / (cm.nu[a] * c0[a]);
    double captured1 = sk1 / (cm.nu[a] * c0[a]);
    cm.K(a, a) = (captured >= 0.5) ? cm.nu[a] - sk / c0[a] : 0.0;
    cm.K1(a, a) = (captured1 >= 0.5) ? cm.nu[a] - sk1 / c0[a] : 0.0;
  }

  cm.L = cm.K;
  cm.L.diagonal() -= cm.nu;
  cm.L1 = cm.K1;
  cm.L1.diagonal() -= cm.nu;

  double e0 = 0.0;
  for (int j = 0; j < 5; ++j) {
    VecR cj = g.sqrtw.asDiagonal() * g.chi.col(j);
    e0 = std::max(e0, (cm.L * cj).norm() / cj.norm());
  }
  cm.diag.eps_null_L = e0;
  cm.diag.eps_null_L1 = (cm.L1 * c0).norm() / c0.norm();

  project_out(cm.L, g.q);
  project_out(cm.L1, g.q.col(0));

  cm.diag.norm_L = lanczos_max_eig(-cm.L, g.q);
  cm.diag.norm_L1 = lanczos_max_eig(-cm.L1, g.q.col(0));
  cm.diag.mu_L = -lanczos_max_eig(cm.L, g.q);
  cm.diag.mu_L1 = -lanczos_max_eig(cm.L1, g.q.col(0));
  if (opts.check_coercivity && (cm.diag.mu_L <= 0.0 || cm.diag.mu_L1 <= 0.0))
    throw Error("assemble: coercivity violated, discrete spectral gap mu_h <= 0 at n=" +
                std::to_string(g.n_per_axis));

  if (!opts.keep_K) {
    cm.K.resize(0, 0);
    cm.K1.resize(0, 0);
  }
  return cm;
}

GridFunction solve_L_inverse(const GridFunction& rhs, Species species,
                             const CollisionMatrices& cm) {
  const VelocityGrid& g = *cm.grid;
  const int n = g.size();
  if (rhs.size() != n) throw Error("solve_L_inverse: grid mismatch");
  const MatR& Lmat = (species == Species::one) ? cm.L : cm.L1;
  auto q = (species == Species::one) ? g.q.leftCols(5) : g.q.leftCols(1);

  VecC rt = g.sqrtw.asDiagonal() * rhs;
  VecC pr = rt - q.cast<cd>() * (q.cast<cd>().adjoint() * rt);
  if (pr.norm() <= 1e-14 * std::max(1.0, rt.norm()))
    return GridFunction::Zero(n);  // rhs entirely in the null space

  // Bordered system: identity on the null space, L on the complement.
  MatR b = Lmat;
  b.noalias() += q * q.transpose();
  VecR xr = lu_solve(b, VecR(pr.real()));
  VecR xi = lu_solve(std::move(b), VecR(pr.imag()));
  VecC x = xr + cd(0, 1) * xi;

  double resid = (Lmat * x - pr).norm();
  if (resid > 1e-10 * std::max(1.0, rt.norm()))
    throw Error("solve_L_inverse: residual " + std::to_string(resid) + " exceeds tolerance");
  return g.sqrtw.cwiseInverse().asDiagonal() * x;
}

VecC solve_L_shifted(const CollisionMatrices& cm, cd shift, const VecC& rhs_coords) {
  const VelocityGrid& g = *cm.grid;
  auto q = g.q.leftCols(5);
  VecC pr = rhs_coords - q.cast<cd>() * (q.cast<cd>().adjoint() * rhs_coords);
  MatC m = cm.L.cast<cd>();
  m.diagonal().array() += shift;
  m.noalias() += (1.0 - shift) * (q * q.transpose()).cast<cd>();
  return lu_solve(std::move(m), pr);
}

TransportCoefficients transport_coefficients(const CollisionMatrices& cm_two,
                                             const CollisionMatrices& cm_one) {
  const VelocityGrid& g1 = *cm_one.grid;
  auto vchi = [&](int axis, int j) {
    GridFunction f(g1.size());
    for (int a = 0; a < g1.size(); ++a) f[a] = g1.nodes[a][axis] * g1.chi(a, j);
    return f;
  };
  TransportCoefficients tc;
  {
    GridFunction rhs = vchi(0, 2);
    GridFunction x = solve_L_inverse(rhs, Species::one, cm_one);
    tc.kappa1 = -std::real(inner_product(x, rhs, g1));
  }
  {
    GridFunction rhs = vchi(0, 4);
    GridFunction x = solve_L_inverse(rhs, Species::one, cm_one);
    tc.kappa2 = -std::real(inner_product(x, rhs, g1));
  }
  {
    const VelocityGrid& g2 = *cm_two.grid;
    GridFunction rhs = chi(1, g2);
    GridFunction x = solve_L_inverse(rhs, Species::two, cm_two);
    tc.kappa3 = -std::real(inner_product(x, rhs, g2));
  }
  if (!(tc.kappa1 > 0.0 && tc.kappa2 > 0.0 && tc.kappa3 > 0.0))
    throw Error("transport_coefficients: non-positive value, discretization failure");
  return tc;
}

}  // namespace vmb
