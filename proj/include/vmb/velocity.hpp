#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace vmb {

using cd = std::complex<double>;
using GridFunction = Eigen::VectorXcd;

// Thrown by every module on contract violations; the CLI maps it to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor-product quadrature rule on R^3_v adapted to integrands of the form
// (smooth) * exp(-|v|^2/2).  Per axis: Gauss-Hermite nodes stretched by
// sqrt(2)*scale, weights folded with the measure so that
//   integral F(v) dv  ~=  sum_a w[a] F(node[a])
// is exact for F = polynomial * exp(-|v|^2/2) of degree <= 2n-1 at scale=1.
struct VelocityGrid {
  int n_per_axis = 0;
  double scale = 1.0;
  std::vector<Eigen::Vector3d> nodes;
  Eigen::VectorXd w;      // positive quadrature weights
  Eigen::VectorXd sqrtw;  // cached sqrt(w) for orthonormal-coordinate work
  Eigen::MatrixXd chi;    // raw samples of chi_0..chi_4, one column each
  Eigen::MatrixXd q;      // orthonormalized chi basis in sqrt(w) coordinates

  int size() const { return static_cast<int>(nodes.size()); }
};

enum class Projector { P0, P1, Pd, Pr };

// n_per_axis >= 4 required; throws Error otherwise.
VelocityGrid build_grid(int n_per_axis, double scale);

// One-dimensional Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w);

double maxwellian(const Eigen::Vector3d& v);

// sum_a w_a f_a conj(g_a); throws on length mismatch.
cd inner_product(const GridFunction& f, const GridFunction& g, const VelocityGrid& grid);

// chi_0 = sqrt(M), chi_j = v_j sqrt(M), chi_4 = (|v|^2-3) sqrt(M) / sqrt(6).
GridFunction chi(int j, const VelocityGrid& grid);

GridFunction project(const GridFunction& f, Projector which, const VelocityGrid& grid);

struct MacroMoments {
  cd n;
  Eigen::Vector3cd m;
  cd q;
};
MacroMoments moments(const GridFunction& f, const VelocityGrid& grid);

}  // namespace vmb
