#include "vmb/linalg.hpp"

#include <lapacke.h>

#include <cmath>

namespace vmb {

static lapack_complex_double* lp(MatC& m) {
  return reinterpret_cast<lapack_complex_double*>(m.data());
}
static lapack_complex_double* lp(VecC& v) {
  return reinterpret_cast<lapack_complex_double*>(v.data());
}

VecC lu_solve(MatC a, VecC b) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.size() != n) throw Error("lu_solve: shape mismatch");
  std::vector<lapack_int> ipiv(n);
  int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, n, 1, lp(a), n, ipiv.data(), lp(b), n);
  if (info != 0) throw Error("lu_solve: zgesv failed, info=" + std::to_string(info));
  return b;
}

VecR lu_solve(MatR a, VecR b) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.size() != n) throw Error("lu_solve: shape mismatch");
  std::vector<lapack_int> ipiv(n);
  int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, a.data(), n, ipiv.data(), b.data(), n);
  if (info != 0) throw Error("lu_solve: dgesv failed, info=" + std::to_string(info));
  return b;
}

LuFactor::LuFactor(MatC a) : lu_(std::move(a)) {
  const int n = static_cast<int>(lu_.rows());
  ipiv_.resize(n);
  double anorm = 0.0;
  for (int j = 0; j < n; ++j) anorm = std::max(anorm, lu_.col(j).cwiseAbs().sum());
  std::vector<lapack_int> piv(n);
  int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lp(lu_), n, piv.data());
  if (info > 0) {
    rcond_ = 0.0;
  } else if (info < 0) {
    throw Error("LuFactor: zgetrf failed");
  } else {
    LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, lp(lu_), n, anorm, &rcond_);
  }
  for (int i = 0; i < n; ++i) ipiv_[i] = piv[i];
}

VecC LuFactor::solve(const VecC& b) const {
  const int n = static_cast<int>(lu_.rows());
  if (rcond_ == 0.0) throw Error("LuFactor: singular factorization");
  VecC x = b;
  std::vector<lapack_int> piv(ipiv_.begin(), ipiv_.end());
  MatC& lu = const_cast<MatC&>(lu_);
  int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, lp(lu), n, piv.data(), lp(x), n);
  if (info != 0) throw Error("LuFactor: zgetrs failed");
  return x;
}

SymEig sym_eig(MatR a) {
  const int n = static_cast<int>(a.rows());
  SymEig r;
  r.values.resize(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, r.values.data());
  if (info != 0) throw Error("sym_eig: dsyevd failed");
  r.vectors = std::move(a);
  return r;
}

ComplexEig complex_eig(MatC a, bool with_vectors) {
  const int n = static_cast<int>(a.rows());
  ComplexEig r;
  r.values.resize(n);
  if (with_vectors) r.vectors.resize(n, n);
  int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', with_vectors ? 'V' : 'N', n, lp(a), n,
                           lp(r.values), nullptr, 1,
                           with_vectors ? lp(r.vectors) : nullptr, with_vectors ? n : 1);
  if (info != 0) throw Error("complex_eig: zgeev failed, info=" + std::to_string(info));
  return r;
}

HessenbergShifted::HessenbergShifted(const MatC& a) : h_(a), q_() {
  const int n = static_cast<int>(a.rows());
  VecC tau(n > 1 ? n - 1 : 1);
  int info = LAPACKE_zgehrd(LAPACK_COL_MAJOR, n, 1, n, lp(h_), n, lp(tau));
  if (info != 0) throw Error("HessenbergShifted: zgehrd failed");
  q_ = h_;
  info = LAPACKE_zunghr(LAPACK_COL_MAJOR, n, 1, n, lp(q_), n, lp(tau));
  if (info != 0) throw Error("HessenbergShifted: zunghr failed");
  for (int j = 0; j < n; ++j)
    for (int i = j + 2; i < n; ++i) h_(i, j) = 0.0;
  scale_ = h_.cwiseAbs().maxCoeff();
  if (scale_ == 0.0) scale_ = 1.0;
}

VecC HessenbergShifted::solve_reduced(cd z, const VecC& bq, double* min_pivot) const {
  const int n = size();
  MatC m = -h_;
  m.diagonal().array() += z;
  VecC x = bq;
  double minp = std::abs(z) / scale_ + 1.0;
  for (int k = 0; k < n - 1; ++k) {
    if (std::abs(m(k + 1, k)) > std::abs(m(k, k))) {
      m.row(k).tail(n - k).swap(m.row(k + 1).tail(n - k));
      std::swap(x[k], x[k + 1]);
    }
    cd piv = m(k, k);
    minp = std::min(minp, std::abs(piv) / scale_);
    if (piv == cd(0.0)) throw Error("HessenbergShifted: exact singular shift");
    cd f = m(k + 1, k) / piv;
    if (f != cd(0.0)) {
      m.row(k + 1).tail(n - k) -= f * m.row(k).tail(n - k);
      x[k + 1] -= f * x[k];
    }
  }
  minp = std::min(minp, std::abs(m(n - 1, n - 1)) / scale_);
  if (min_pivot) *min_pivot = minp;
  for (int k = n - 1; k >= 0; --k) {
    cd s = x[k];
    for (int j = k + 1; j < n; ++j) s -= m(k, j) * x[j];
    if (m(k, k) == cd(0.0)) throw Error("HessenbergShifted: singular back substitution");
    x[k] = s / m(k, k);
  }
  return x;
}

double lanczos_max_eig(const MatR& a, const MatR& qnull, int iters) {
  const int n = static_cast<int>(a.rows());
  // Rather than deflating (roundoff drift resurrects the null directions as
  // ghost Ritz values at 0), shift span(qnull) far below the spectrum.
  double shift = 0.0;
  for (int j = 0; j < n; ++j) shift = std::max(shift, a.col(j).cwiseAbs().sum());
  shift = 4.0 * shift + 1.0;
  auto apply = [&](const VecR& v) -> VecR {
    VecR w = a * v;
    if (qnull.cols() > 0) w.noalias() -= shift * (qnull * (qnull.transpose() * v));
    return w;
  };

  VecR v = VecR::Zero(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(0.7 * (i + 1)) + 0.3;
  v.normalize();

  std::vector<VecR> basis;
  std::vector<double> alpha, beta;
  VecR vprev = VecR::Zero(n);
  double b = 0.0;
  const int m = std::min(iters, n);
  for (int k = 0; k < m; ++k) {
    basis.push_back(v);
    VecR w = apply(v);
    double al = v.dot(w);
    alpha.push_back(al);
    w -= al * v + b * vprev;
    for (const auto& u : basis) w -= u.dot(w) * u;  // full reorthogonalization
    for (const auto& u : basis) w -= u.dot(w) * u;
    b = w.norm();
    if (b < 1e-13) break;
    beta.push_back(b);
    vprev = v;
    v = w / b;
  }
  const int k = static_cast<int>(alpha.size());
  VecR d = Eigen::Map<VecR>(alpha.data(), k);
  VecR e(k > 1 ? k - 1 : 1);
  for (int i = 0; i + 1 < k; ++i) e[i] = beta[i];
  int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', k, d.data(), e.data(), nullptr, k);
  if (info != 0) throw Error("lanczos_max_eig: dstev failed");
  return d[k - 1];
}

}  // namespace vmb
