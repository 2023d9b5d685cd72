#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "vmb/velocity.hpp"

namespace vmb {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

// One-shot dense solves (LAPACK getrf/getrs under the hood).
VecC lu_solve(MatC a, VecC b);
VecR lu_solve(MatR a, VecR b);

// Reusable complex LU factorization.
class LuFactor {
 public:
  explicit LuFactor(MatC a);
  VecC solve(const VecC& b) const;
  // 1/(condition estimate in the 1-norm); 0 means singular to working precision.
  double rcond() const { return rcond_; }

 private:
  MatC lu_;
  std::vector<int> ipiv_;
  double rcond_ = 0.0;
};

struct SymEig {
  VecR values;  // ascending
  MatR vectors;
};
SymEig sym_eig(MatR a);

struct ComplexEig {
  VecC values;
  MatC vectors;  // empty when not requested
};
ComplexEig complex_eig(MatC a, bool with_vectors);

// Unitary Hessenberg reduction A = Q H Q^*.  Shifted systems (z I - A) x = b
// then cost O(n^2) each: x = Q y with (z I - H) y = Q^* b.
class HessenbergShifted {
 public:
  explicit HessenbergShifted(const MatC& a);
  VecC reduce(const VecC& v) const { return q_.adjoint() * v; }
  // Solves (z I - H) y = bq by Hessenberg elimination with partial pivoting.
  // min_pivot (optional) receives the smallest pivot magnitude relative to
  // the matrix scale; values near 0 flag a shift close to an eigenvalue.
  VecC solve_reduced(cd z, const VecC& bq, double* min_pivot = nullptr) const;
  int size() const { return static_cast<int>(h_.rows()); }

 private:
  MatC h_;
  MatC q_;
  double scale_ = 1.0;
};

// Largest eigenvalue of a symmetric matrix restricted to the orthogonal
// complement of span(qnull) (columns orthonormal).  Lanczos with full
// reorthogonalization; adequate for gap diagnostics.
double lanczos_max_eig(const MatR& a, const MatR& qnull, int iters = 120);

}  // namespace vmb
