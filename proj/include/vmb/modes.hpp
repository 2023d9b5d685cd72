#pragma once

#include <array>

#include "vmb/collision.hpp"

namespace vmb {

// Orthonormal right-handed frame adapted to a mode direction:
// omega x W1 = W2 and omega x W2 = -W1.
struct Frame {
  Eigen::Vector3d omega, W1, W2;

  static Frame canonical();  // e1, e2, e3
  static Frame from_direction(const Eigen::Vector3d& omega);
  // Tangent from the transverse unit vector (-xi2, xi1, 0)/sqrt(xi1^2+xi2^2);
  // throws for xi parallel to e3.
  static Frame from_xi(const Eigen::Vector3d& xi);
  double orthonormality_defect() const;
};

enum class ModeSpecies { boltzmann, two_species, one_species };

// Dense generator of a single Fourier mode in sqrt(w) coordinates.  State
// layout: f coefficients (n), then omega x E in {W1,W2} (2), then
// omega x B (2).  The boltzmann flavour carries no field block.
struct ModeOperator {
  ModeSpecies species = ModeSpecies::boltzmann;
  double s = 0.0;
  Frame frame;
  std::shared_ptr<const VelocityGrid> grid;
  MatC matrix;

  int n_velocity() const { return grid->size(); }
  int dim() const { return static_cast<int>(matrix.rows()); }
  bool has_fields() const { return species != ModeSpecies::boltzmann; }
};

ModeOperator assemble_mode(ModeSpecies species, double s, const Frame& frame,
                           const CollisionMatrices& cm);

// (U,V)_xi = (f,g) + s^{-2} (P_d f, P_d g) + (E1,E2) + (B1,B2) on states in
// sqrt(w) coordinates.  For the boltzmann flavour this is the plain product.
cd weighted_inner(const VecC& u, const VecC& v, const ModeOperator& op);
double weighted_norm(const VecC& u, const ModeOperator& op);

// Closed-form macroscopic operator on N_0 x C^3_xi x C^3_xi; basis
// (chi0, v.omega, v.W1, v.W2, chi4, X1, X2, Y1, Y2).
Eigen::Matrix<cd, 9, 9> g6_matrix(double s);
std::array<cd, 9> g6_eigenvalues_closed(double s);

}  // namespace vmb
