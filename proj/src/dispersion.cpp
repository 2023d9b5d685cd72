#include "vmb/dispersion.hpp"

#include <cmath>

namespace vmb {

namespace {

// Trailing columns of the full Householder Q of qcols span its complement.
MatR complement_basis(const MatR& qcols) {
  const int n = static_cast<int>(qcols.rows());
  const int k = static_cast<int>(qcols.cols());
  Eigen::HouseholderQR<MatR> qr(qcols);
  MatR qfull = qr.householderQ() * MatR::Identity(n, n);
  return qfull.rightCols(n - k);
}

}  // namespace

DispersionEvaluator::DispersionEvaluator(std::shared_ptr<const CollisionMatrices> cm,
                                         int cache_cap)
    : cm_(std::move(cm)), cache_cap_(static_cast<size_t>(cache_cap)) {}

DispersionEvaluator::VariantData& DispersionEvaluator::vd(ResolventVariant var) {
  auto& slot = data_[static_cast<int>(var)];
  if (slot) return *slot;
  const VelocityGrid& g = *cm_->grid;
  const int n = g.size();
  VecR v1(n);
  for (int a = 0; a < n; ++a) v1[a] = g.nodes[a].x();
  VecR c0 = g.sqrtw.asDiagonal() * g.chi.col(0);

  auto d = std::make_unique<VariantData>();
  switch (var) {
    case ResolventVariant::low_two:
    case ResolventVariant::low_one: {
      const bool two = var == ResolventVariant::low_two;
      d->basis = complement_basis(two ? MatR(g.q.leftCols(1)) : MatR(g.q.leftCols(5)));
      const MatR& lmat = two ? cm_->L1 : cm_->L;
      d->a0.noalias() = d->basis.transpose() * (lmat * d->basis);
      d->vb.noalias() = d->basis.transpose() * (v1.asDiagonal() * d->basis);
      d->vecs.resize(5);
      for (int j = 0; j < 5; ++j) {
        VecR raw(n);
        for (int a = 0; a < n; ++a)
          raw[a] = g.sqrtw[a] * (two ? g.chi(a, j) : g.nodes[a].x() * g.chi(a, j));
        d->vecs[j] = d->basis.transpose() * raw;
      }
      break;
    }
    case ResolventVariant::high_two:
    case ResolventVariant::high_one: {
      d->a0 = (var == ResolventVariant::high_two) ? cm_->L1 : cm_->L;
      d->vb = MatR(v1.asDiagonal());
      d->vc0 = v1.cwiseProduct(c0);
      d->vecs.resize(5);
      for (int j = 0; j < 5; ++j) d->vecs[j] = g.sqrtw.asDiagonal() * g.chi.col(j);
      break;
    }
  }
  slot = std::move(d);
  return *slot;
}

DispersionEvaluator::Cache& DispersionEvaluator::cache_for(ResolventVariant var, double s) {
  for (auto it = caches_.begin(); it != caches_.end(); ++it)
    if (it->var == var && it->s == s) {
      caches_.splice(caches_.begin(), caches_, it);
      return caches_.front();
    }
  VariantData& d = vd(var);
  const bool high = var == ResolventVariant::high_two || var == ResolventVariant::high_one;
  if (high && !(s > 0.0)) throw Error("resolvent_moment: high-frequency variant needs s > 0");

  MatC a = d.a0.cast<cd>();
  if (s != 0.0) a -= cd(0, s) * d.vb.cast<cd>();
  if (high) {
    VecR c0 = cm_->grid->sqrtw.asDiagonal() * cm_->grid->chi.col(0);
    a.noalias() -= (cd(0, 1) / s) * (d.vc0 * c0.transpose()).cast<cd>();
  }
  Cache c;
  c.var = var;
  c.s = s;
  c.hess = std::make_unique<HessenbergShifted>(a);
  c.reduced.resize(d.vecs.size());
  for (size_t j = 0; j < d.vecs.size(); ++j) {
    if (d.vecs[j].size() == 0) continue;
    c.reduced[j] = c.hess->reduce(d.vecs[j].cast<cd>());
  }
  caches_.push_front(std::move(c));
  if (caches_.size() > cache_cap_) caches_.pop_back();
  return caches_.front();
}

cd DispersionEvaluator::moment(ResolventVariant var, cd lambda, double s, int i, int j) {
  const bool high = var == ResolventVariant::high_two || var == ResolventVariant::high_one;
  if (high) i = j = 2;
  if (i < 0 || i > 4 || j < 0 || j > 4) throw Error("resolvent_moment: index out of range");
  Cache& c = cache_for(var, s);
  double minpiv = 0.0;
  VecC y = c.hess->solve_reduced(lambda, c.reduced[i], &minpiv);
  if (minpiv < 1e-12)
    throw Error("resolvent_moment: shift within " + std::to_string(minpiv) +
                " of an eigenvalue (near-singular solve)");
  // R = -(lambda - A)^{-1} for the low variants and (B - lambda)^{-1} for the
  // high ones; both reduce to minus the shifted solve.
  return -c.reduced[j].dot(y);
}

cd DispersionEvaluator::moment_direct(ResolventVariant var, cd lambda, double s, int i,
                                      int j) const {
  const VelocityGrid& g = *cm_->grid;
  const int n = g.size();
  const bool high = var == ResolventVariant::high_two || var == ResolventVariant::high_one;
  if (high) i = j = 2;
  VecR v1(n);
  for (int a = 0; a < n; ++a) v1[a] = g.nodes[a].x();
  VecR c0 = g.sqrtw.asDiagonal() * g.chi.col(0);

  auto vec = [&](int jc) {
    VecR r(n);
    const bool momentum_weighted = (var == ResolventVariant::low_one);
    for (int a = 0; a < n; ++a)
      r[a] = g.sqrtw[a] * (momentum_weighted ? g.nodes[a].x() : 1.0) * g.chi(a, jc);
    return r;
  };
  VecR rhs = vec(i), mom = vec(j);

  MatC m;
  if (high) {
    const MatR& lmat = (var == ResolventVariant::high_two) ? cm_->L1 : cm_->L;
    m = -lmat.cast<cd>();
    m.noalias() += cd(0, s) * MatC(v1.cast<cd>().asDiagonal());
    m.noalias() += (cd(0, 1) / s) * (v1.cwiseProduct(c0) * c0.transpose()).cast<cd>();
    m.diagonal().array() += lambda;
    VecC x = lu_solve(std::move(m), rhs.cast<cd>());
    return -mom.cast<cd>().dot(x);
  }
  const bool two = var == ResolventVariant::low_two;
  auto q = two ? cm_->grid->q.leftCols(1) : cm_->grid->q.leftCols(5);
  const MatR& lmat = two ? cm_->L1 : cm_->L;
  auto proj = [&](VecC v) {
    v -= q.cast<cd>() * (q.cast<cd>().adjoint() * v);
    return v;
  };
  // P (lambda - L + i s v1) P + (identity on the null space)
  MatC core = -lmat.cast<cd>();
  core.noalias() += cd(0, s) * MatC(v1.cast<cd>().asDiagonal());
  core.diagonal().array() += lambda;
  MatC pcore = core;
  MatC tmp = q.transpose().cast<cd>() * core;
  pcore.noalias() -= q.cast<cd>() * tmp;
  tmp = pcore * q.cast<cd>();
  pcore.noalias() -= tmp * q.transpose().cast<cd>();
  pcore.noalias() += (q * q.transpose()).cast<cd>();
  VecC x = lu_solve(std::move(pcore), proj(rhs.cast<cd>()));
  return -mom.cast<cd>().dot(x);
}

cd DispersionEvaluator::D_two_low0(cd lambda, double s) {
  return lambda - (1.0 + s * s) * moment(ResolventVariant::low_two, lambda, s, 1, 1);
}

cd DispersionEvaluator::D_two_low1(cd lambda, double s) {
  return lambda * lambda - moment(ResolventVariant::low_two, lambda, s, 2, 2) * lambda + s * s;
}

cd DispersionEvaluator::detM_one(cd lambda, double s) {
  const cd I(0, 1);
  cd r11 = moment(ResolventVariant::low_one, lambda, s, 1, 1);
  cd r41 = moment(ResolventVariant::low_one, lambda, s, 4, 1);
  cd r14 = moment(ResolventVariant::low_one, lambda, s, 1, 4);
  cd r44 = moment(ResolventVariant::low_one, lambda, s, 4, 4);
  const double r23 = std::sqrt(2.0 / 3.0);
  // cofactor expansion of the 3x3 system matrix; the i s * i(s + 1/s)
  // product is written as -(s^2+1) so s = 0 stays finite
  cd d22 = lambda - s * s * r11;
  cd d33 = lambda - s * s * r44;
  cd off1 = I * s * r23 - s * s * r41;
  cd off2 = I * s * r23 - s * s * r14;
  return lambda * (d22 * d33 - off1 * off2) + (s * s + 1.0) * d33;
}

cd DispersionEvaluator::D_one_low(cd lambda, double s) {
  cd r22 = moment(ResolventVariant::low_one, lambda, s, 2, 2);
  return lambda * lambda * lambda - s * s * r22 * lambda * lambda + (1.0 + s * s) * lambda -
         s * s * s * s * r22;
}

cd DispersionEvaluator::D_high(Species species, cd lambda, double s) {
  auto var = (species == Species::two) ? ResolventVariant::high_two : ResolventVariant::high_one;
  cd b = moment(var, lambda, s, 2, 2);
  return lambda * lambda - b * lambda + s * s;
}

NewtonResult newton_solve(const std::function<cd(cd)>& dfun, cd lambda0,
                          const NewtonOptions& opts) {
  NewtonResult r;
  r.lambda = lambda0;
  cd d = dfun(r.lambda);
  for (r.iters = 0; r.iters < opts.max_iter; ++r.iters) {
    r.residual = std::abs(d);
    if (r.residual <= opts.tol * (1.0 + std::abs(r.lambda))) {
      r.converged = true;
      return r;
    }
    double h = opts.fd_step * (1.0 + std::abs(r.lambda));
    cd dp, dm;
    try {
      dp = dfun(r.lambda + h);
      dm = dfun(r.lambda - h);
    } catch (const Error&) {
      h *= 0.5;  // stepped into a near-singular resolvent region
      try {
        dp = dfun(r.lambda + h);
        dm = dfun(r.lambda - h);
      } catch (const Error&) {
        return r;
      }
    }
    cd deriv = (dp - dm) / (2.0 * h);
    if (std::abs(deriv) == 0.0) return r;
    cd step = -d / deriv;
    // damped update: insist on residual decrease
    cd lam_new = r.lambda + step;
    cd d_new;
    int halvings = 0;
    for (;; ++halvings) {
      bool ok = true;
      try {
        d_new = dfun(lam_new);
      } catch (const Error&) {
        ok = false;
      }
      if (ok && (std::abs(d_new) < std::abs(d) || halvings >= 10)) break;
      if (halvings >= 10) return r;
      step *= 0.5;
      lam_new = r.lambda + step;
    }
    r.lambda = lam_new;
    d = d_new;
  }
  r.residual = std::abs(d);
  r.converged = r.residual <= opts.tol * (1.0 + std::abs(r.lambda));
  return r;
}

DispersionBranch trace_branch(const std::function<cd(cd, double)>& dfun,
                              const std::vector<double>& s_grid, cd lambda_seed,
                              const std::string& label, int multiplicity,
                              const std::vector<const DispersionBranch*>& other_branches,
                              const NewtonOptions& opts) {
  DispersionBranch br;
  br.label = label;
  br.multiplicity = multiplicity;
  for (size_t k = 1; k < s_grid.size(); ++k)
    if (!(s_grid[k] > s_grid[k - 1])) throw Error("trace_branch: s grid must increase");

  cd pred = lambda_seed;
  for (size_t k = 0; k < s_grid.size(); ++k) {
    const double s = s_grid[k];
    const size_t np = br.s.size();
    if (np >= 3) {
      // quadratic extrapolation through the last three accepted points
      double s0 = br.s[np - 3], s1 = br.s[np - 2], s2 = br.s[np - 1];
      cd l0 = br.lambda[np - 3], l1 = br.lambda[np - 2], l2 = br.lambda[np - 1];
      auto lagr = [&](double t) {
        return l0 * ((t - s1) * (t - s2)) / ((s0 - s1) * (s0 - s2)) +
               l1 * ((t - s0) * (t - s2)) / ((s1 - s0) * (s1 - s2)) +
               l2 * ((t - s0) * (t - s1)) / ((s2 - s0) * (s2 - s1));
      };
      pred = lagr(s);
    } else if (np >= 1) {
      pred = br.lambda[np - 1];
    }
    NewtonResult nr = newton_solve([&](cd l) { return dfun(l, s); }, pred, opts);
    if (!nr.converged) {
      if (k == 0) throw Error("trace_branch: seed did not converge at s = " + std::to_string(s));
      br.complete = false;
      return br;  // partial branch, flagged by complete=false
    }
    for (const DispersionBranch* other : other_branches) {
      if (!other) continue;
      for (size_t m = 0; m < other->s.size(); ++m)
        if (other->s[m] == s && std::abs(other->lambda[m] - nr.lambda) <
                                    10.0 * opts.tol * (1.0 + std::abs(nr.lambda)))
          br.ambiguous = true;
    }
    br.s.push_back(s);
    br.lambda.push_back(nr.lambda);
    br.residual.push_back(nr.residual);
    br.converged.push_back(true);
  }
  br.complete = true;
  return br;
}

SpectrumCoefficients asymptotic_coefficients(const CollisionMatrices& cm_two,
                                             const CollisionMatrices& cm_one) {
  SpectrumCoefficients sc;
  TransportCoefficients tc = transport_coefficients(cm_two, cm_one);
  sc.kappa1 = tc.kappa1;
  sc.kappa2 = tc.kappa2;
  sc.kappa3 = tc.kappa3;
  sc.a3 = tc.kappa1;  // same formula, shared solve path
  sc.a0 = tc.kappa2;

  {
    const VelocityGrid& g = *cm_two.grid;
    GridFunction x = solve_L_inverse(chi(2, g), Species::two, cm_two);
    double m = std::real(inner_product(x, chi(2, g), g));
    sc.a1_two = -1.0 / m;
  }

  const VelocityGrid& g = *cm_one.grid;
  const int n = g.size();
  auto solve_shift_i = [&](int jchi, VecC& y, double& norm2, double& lyy) {
    VecC rhs(n);
    for (int a = 0; a < n; ++a) rhs[a] = g.sqrtw[a] * g.nodes[a].x() * g.chi(a, jchi);
    y = solve_L_shifted(cm_one, cd(0, 1), rhs);
    norm2 = y.squaredNorm();
    lyy = std::real(y.dot(cm_one.L.cast<cd>() * y));
  };
  VecC y;
  double n2 = 0.0, lyy = 0.0;
  solve_shift_i(1, y, n2, lyy);
  sc.a1 = -0.5 * lyy;
  sc.b1 = 0.5 * (n2 + 5.0 / 3.0);
  solve_shift_i(2, y, n2, lyy);
  sc.a2 = -0.5 * lyy;
  sc.b2 = 0.5 * (n2 + 1.0);

  if (!(sc.a0 > 0 && sc.a1 > 0 && sc.a2 > 0 && sc.a3 > 0 && sc.b1 > 0 && sc.b2 > 0 &&
        sc.a1_two > 0))
    throw Error("asymptotic_coefficients: non-positive coefficient, discretization failure");
  return sc;
}

}  // namespace vmb
