#include "vmb/velocity.hpp"

#include <lapacke.h>

#include <cmath>

namespace vmb {

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
  std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k / 2.0);
  std::vector<double> z(static_cast<size_t>(n) * n);
  int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, diag.data(), off.data(), z.data(), n);
  if (info != 0) throw Error("gauss_hermite: dstev failed");
  x.resize(n);
  w.resize(n);
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    x[i] = diag[i];
    double v0 = z[static_cast<size_t>(i) * n];
    w[i] = mu0 * v0 * v0;
  }
}

double maxwellian(const Eigen::Vector3d& v) {
  return std::pow(2.0 * M_PI, -1.5) * std::exp(-0.5 * v.squaredNorm());
}

VelocityGrid build_grid(int n_per_axis, double scale) {
  if (n_per_axis < 4) throw Error("build_grid: n_per_axis must be >= 4");
  if (!(scale > 0.0)) throw Error("build_grid: scale must be positive");

  std::vector<double> x, wgh;
  gauss_hermite(n_per_axis, x, wgh);
  // enforce the analytic +-x symmetry of the rule exactly
  for (int i = 0, j = n_per_axis - 1; i < j; ++i, --j) {
    double xs = 0.5 * (x[j] - x[i]);
    x[i] = -xs;
    x[j] = xs;
    double ws = 0.5 * (wgh[i] + wgh[j]);
    wgh[i] = wgh[j] = ws;
  }
  if (n_per_axis % 2 == 1) x[n_per_axis / 2] = 0.0;

  const double c = std::sqrt(2.0) * scale;
  std::vector<double> vx(n_per_axis), w1(n_per_axis);
  for (int i = 0; i < n_per_axis; ++i) {
    vx[i] = c * x[i];
    // fold the Gaussian weight back so w1 carries the plain Lebesgue measure
    w1[i] = c * wgh[i] * std::exp(x[i] * x[i]);
  }

  VelocityGrid g;
  g.n_per_axis = n_per_axis;
  g.scale = scale;
  const int n = n_per_axis;
  const int total = n * n * n;
  g.nodes.resize(total);
  g.w.resize(total);
  int a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++a) {
        g.nodes[a] = Eigen::Vector3d(vx[i], vx[j], vx[k]);
        g.w[a] = w1[i] * w1[j] * w1[k];
      }
  g.sqrtw = g.w.cwiseSqrt();

  g.chi.resize(total, 5);
  for (int b = 0; b < total; ++b) {
    const Eigen::Vector3d& v = g.nodes[b];
    double sm = std::sqrt(maxwellian(v));
    g.chi(b, 0) = sm;
    g.chi(b, 1) = v.x() * sm;
    g.chi(b, 2) = v.y() * sm;
    g.chi(b, 3) = v.z() * sm;
    g.chi(b, 4) = (v.squaredNorm() - 3.0) * sm / std::sqrt(6.0);
  }

  // Orthonormalize the collision invariants in sqrt(w) coordinates (modified
  // Gram-Schmidt, two passes).  Projections built on q are then idempotent to
  // machine precision even though the raw Gram matrix is only 1e-8 exact.
  Eigen::MatrixXd q = g.sqrtw.asDiagonal() * g.chi;
  for (int pass = 0; pass < 2; ++pass)
    for (int jc = 0; jc < 5; ++jc) {
      for (int kc = 0; kc < jc; ++kc) q.col(jc) -= q.col(kc).dot(q.col(jc)) * q.col(kc);
      q.col(jc).normalize();
    }
  g.q = q;
  return g;
}

cd inner_product(const GridFunction& f, const GridFunction& g, const VelocityGrid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw Error("inner_product: grid mismatch");
  cd s = 0.0;
  for (int a = 0; a < grid.size(); ++a) s += grid.w[a] * f[a] * std::conj(g[a]);
  return s;
}

GridFunction chi(int j, const VelocityGrid& grid) {
  if (j < 0 || j > 4) throw Error("chi: index out of range");
  return grid.chi.col(j).cast<cd>();
}

GridFunction project(const GridFunction& f, Projector which, const VelocityGrid& grid) {
  if (f.size() != grid.size()) throw Error("project: grid mismatch");
  Eigen::VectorXcd ft = grid.sqrtw.asDiagonal() * f;
  const int jmax = (which == Projector::Pd || which == Projector::Pr) ? 1 : 5;
  Eigen::VectorXcd p = Eigen::VectorXcd::Zero(f.size());
  for (int j = 0; j < jmax; ++j) {
    cd c = grid.q.col(j).cast<cd>().adjoint() * ft;
    p += c * grid.q.col(j).cast<cd>();
  }
  if (which == Projector::P1 || which == Projector::Pr) p = ft - p;
  return grid.sqrtw.cwiseInverse().asDiagonal() * p;
}

MacroMoments moments(const GridFunction& f, const VelocityGrid& grid) {
  MacroMoments mm;
  mm.n = inner_product(f, chi(0, grid), grid);
  for (int j = 0; j < 3; ++j) mm.m[j] = inner_product(f, chi(j + 1, grid), grid);
  mm.q = inner_product(f, chi(4, grid), grid);
  return mm;
}

}  // namespace vmb
