#pragma once

#include "vmb/dispersion.hpp"
#include "vmb/modes.hpp"

namespace vmb {

struct ValidatedPair {
  cd value{};
  VecC vector;
  double residual = 0.0;  // ||A v - lambda v|| / (||A|| ||v||)
};

struct SpectrumReport {
  double s = 0.0;
  std::string frame_id;
  VecC eigenvalues;
  cd rightmost{};
  double op_norm = 0.0;  // infinity-norm of the matrix, scale for residuals
  std::vector<ValidatedPair> validated;
};

struct EigOptions {
  int dim_cap = 2048;
  int validate_count = 10;
  unsigned seed = 1234;
};

// Dense spectrum (LAPACK Hessenberg + shifted QR); a random subset of
// eigenvalues is re-validated by shifted inverse iteration.
SpectrumReport eig_all(const ModeOperator& op, const EigOptions& opts = {});

// k eigenpairs nearest target via shifted inverse iteration with
// re-orthogonalization; residuals satisfy ||Av - lv|| <= 1e-8 ||A|| ||v||.
std::vector<ValidatedPair> eig_near(const ModeOperator& op, cd target, int k);

struct GapRow {
  double s = 0.0;
  double rightmost_re = 0.0;
};

// Rightmost eigenvalue per s; alpha_emp = -max(rightmost_re).
std::vector<GapRow> gap_scan(ModeSpecies species, const CollisionMatrices& cm,
                             const std::vector<double>& s_list,
                             const Frame& frame = Frame::canonical());

// Max over branch points of the distance from lambda(s) to the nearest
// eigenvalue of the assembled operator.
double crossvalidate(const DispersionBranch& branch, ModeSpecies species,
                     const CollisionMatrices& cm, const Frame& frame = Frame::canonical());

}  // namespace vmb
