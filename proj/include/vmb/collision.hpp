#pragma once

#include <memory>

#include "vmb/linalg.hpp"
#include "vmb/velocity.hpp"

namespace vmb {

// Selects the linearized operator: Species::one -> L (null space chi_0..chi_4),
// Species::two -> L_1 (null space chi_0).
enum class Species { two, one };

// Hard-sphere collision frequency nu(v) = 2*pi * int |v-v*| M(v*) dv*,
// evaluated by a 1-D radial quadrature after the exact sphere reduction.
double collision_frequency(const Eigen::Vector3d& v);
double collision_frequency_radial(double speed);

// Closed-form hard-sphere kernels.  Both have the Grad gain factor
//   exp(-|v-w|^2/8 - (|v|^2-|w|^2)^2 / (8 |v-w|^2)) / |v-w|,
// k additionally carries the loss part |v-w| exp(-(|v|^2+|w|^2)/4).
// v == w is a diagonal singularity and throws; assembly calibrates the
// diagonal separately.
double kernel_k(const Eigen::Vector3d& v, const Eigen::Vector3d& w);
double kernel_k1(const Eigen::Vector3d& v, const Eigen::Vector3d& w);

struct CollisionDiagnostics {
  double eps_null_L = 0.0;   // max_j ||L chi_j|| before projection
  double eps_null_L1 = 0.0;  // ||L1 chi_0|| before projection (0 by calibration)
  double norm_L = 0.0;       // spectral norm estimate of projected L
  double norm_L1 = 0.0;
  double mu_L = 0.0;   // spectral gap of L on span{chi}^perp
  double mu_L1 = 0.0;  // spectral gap of L1 on chi_0^perp
};

// All matrices live in sqrt(w) coordinates (coeff vector f~ = sqrt(w).*f), in
// which the discrete inner product is Euclidean and self-adjoint operators are
// literally symmetric.  L and L1 are post-processed by exact projection so
// their null spaces are exactly span(grid.q cols 0..4) resp. col 0.
struct CollisionMatrices {
  std::shared_ptr<const VelocityGrid> grid;
  VecR nu;
  MatR K, K1;
  MatR L, L1;
  CollisionDiagnostics diag;
};

struct AssembleOptions {
  bool parallel = true;
  bool keep_K = true;              // drop K/K1 storage after deriving L/L1
  bool check_coercivity = true;    // throw if mu_h <= 0
};

CollisionMatrices assemble(std::shared_ptr<const VelocityGrid> grid,
                           const AssembleOptions& opts = {});

// x with L x = P(rhs), x orthogonal to the null space; residual <= 1e-10*|rhs|.
GridFunction solve_L_inverse(const GridFunction& rhs, Species species,
                             const CollisionMatrices& cm);

// (L + shift*P1)^{-1} P1 rhs on the complement of the L null space (coords in,
// coords out; used by the dispersion expansion coefficients).
VecC solve_L_shifted(const CollisionMatrices& cm, cd shift, const VecC& rhs_coords);

struct TransportCoefficients {
  double kappa1 = 0.0;  // -(L^{-1} P1(v1 chi2), v1 chi2)
  double kappa2 = 0.0;  // -(L^{-1} P1(v1 chi4), v1 chi4)
  double kappa3 = 0.0;  // -(L1^{-1} chi1, chi1)
};

TransportCoefficients transport_coefficients(const CollisionMatrices& cm_two,
                                             const CollisionMatrices& cm_one);

}  // namespace vmb
