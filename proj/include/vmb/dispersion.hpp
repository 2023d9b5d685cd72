#pragma once

#include <functional>
#include <list>
#include <string>

#include "vmb/modes.hpp"

namespace vmb {

enum class ResolventVariant { low_two, low_one, high_two, high_one };

struct NewtonOptions {
  double tol = 1e-11;  // accept when |D| <= tol * (1 + |lambda|)
  int max_iter = 50;
  double fd_step = 1e-6;
};

struct NewtonResult {
  cd lambda{};
  double residual = 0.0;
  int iters = 0;
  bool converged = false;
};

NewtonResult newton_solve(const std::function<cd(cd)>& dfun, cd lambda0,
                          const NewtonOptions& opts = {});

struct DispersionBranch {
  std::string label;
  int multiplicity = 1;
  std::vector<double> s;
  std::vector<cd> lambda;
  std::vector<double> residual;
  std::vector<bool> converged;
  bool complete = false;   // every grid point converged
  bool ambiguous = false;  // collided with another supplied branch
};

struct SpectrumCoefficients {
  double a1_two = 0.0;                          // two-species quadratic coefficient
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;  // one-species
  double b1 = 0.0, b2 = 0.0;
  double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
};

// Resolvent-moment evaluation at the canonical frame omega = e1.  Shifted
// solves factor the complement operator into Hessenberg form once per s, so
// Newton iterations and lambda scans cost O(n^2) each.
class DispersionEvaluator {
 public:
  DispersionEvaluator(std::shared_ptr<const CollisionMatrices> cm, int cache_cap = 6);

  // low_two: (R(lambda,s e1) chi_i, chi_j), R = -(lambda P_r - Q)^{-1}
  // low_one: (R^1(lambda,s e1) P_1(v_1 chi_i), v_1 chi_j)
  // high_*:  ((B(s e1) - lambda)^{-1} chi_2, chi_2)  (i, j ignored)
  cd moment(ResolventVariant var, cd lambda, double s, int i, int j);

  // Same moment through one dense LU on the full space (projection-bordered);
  // no caching.  Kept as an independent solve path for the refinement oracles.
  cd moment_direct(ResolventVariant var, cd lambda, double s, int i, int j) const;

  cd D_two_low0(cd lambda, double s);
  cd D_two_low1(cd lambda, double s);
  cd detM_one(cd lambda, double s);
  cd D_one_low(cd lambda, double s);
  cd D_high(Species species, cd lambda, double s);

  const CollisionMatrices& cm() const { return *cm_; }

 private:
  struct VariantData {
    MatR a0;      // restricted collision part
    MatR vb;      // restricted v1 multiplication
    MatR basis;   // complement basis columns (empty for high variants)
    VecR vc0;     // (v1 .* c0) for the high-frequency P_d coupling
    std::vector<VecR> vecs;  // moment vectors, restricted where applicable
  };
  struct Cache {
    ResolventVariant var;
    double s;
    std::unique_ptr<HessenbergShifted> hess;
    std::vector<VecC> reduced;  // Q^* vecs
  };

  VariantData& vd(ResolventVariant var);
  Cache& cache_for(ResolventVariant var, double s);

  std::shared_ptr<const CollisionMatrices> cm_;
  std::array<std::unique_ptr<VariantData>, 4> data_;
  std::list<Cache> caches_;
  size_t cache_cap_;
};

// Continuation over an increasing s grid with quadratic extrapolation
// predictor; seeds from the expansion values.  other_branches, when given,
// is checked for collisions (two roots within 10x the Newton tolerance).
DispersionBranch trace_branch(const std::function<cd(cd, double)>& dfun,
                              const std::vector<double>& s_grid, cd lambda_seed,
                              const std::string& label, int multiplicity = 1,
                              const std::vector<const DispersionBranch*>& other_branches = {},
                              const NewtonOptions& opts = {});

SpectrumCoefficients asymptotic_coefficients(const CollisionMatrices& cm_two,
                                             const CollisionMatrices& cm_one);

}  // namespace vmb
