#include "vmb/spectra.hpp"

#include <algorithm>
#include <random>

namespace vmb {

namespace {

double inf_norm(const MatC& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i) m = std::max(m, a.row(i).cwiseAbs().sum());
  return m;
}

// One eigenpair by inverse iteration around shift; returns residual/(|A| |v|).
ValidatedPair inverse_iterate(const MatC& a, cd shift, double anorm, unsigned seed) {
  const int n = static_cast<int>(a.rows());
  MatC as = a;
  cd sh = shift;
  std::unique_ptr<LuFactor> lu;
  for (int attempt = 0;; ++attempt) {
    as = a;
    as.diagonal().array() -= sh;
    lu = std::make_unique<LuFactor>(std::move(as));
    if (lu->rcond() > 0.0) break;
    if (attempt >= 2) throw Error("eig_near: singular shift after perturbation retries");
    sh += 1e-8 * (1.0 + std::abs(sh));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VecC v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  v.normalize();
  ValidatedPair p;
  for (int it = 0; it < 50; ++it) {
    VecC w = lu->solve(v);
    v = w / w.norm();
    cd lam = v.dot(a * v);
    double res = (a * v - lam * v).norm() / anorm;
    p.value = lam;
    p.vector = v;
    p.residual = res;
    if (res <= 1e-10) break;
  }
  return p;
}

}  // namespace

SpectrumReport eig_all(const ModeOperator& op, const EigOptions& opts) {
  if (op.dim() > opts.dim_cap)
    throw Error("eig_all: dimension " + std::to_string(op.dim()) + " exceeds cap");
  SpectrumReport rep;
  rep.s = op.s;
  rep.op_norm = inf_norm(op.matrix);
  ComplexEig eg = complex_eig(op.matrix, false);
  rep.eigenvalues = eg.values;
  rep.rightmost = eg.values[0];
  for (int i = 1; i < eg.values.size(); ++i)
    if (eg.values[i].real() > rep.rightmost.real()) rep.rightmost = eg.values[i];

  std::mt19937_64 rng(opts.seed);
  std::vector<int> idx(eg.values.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  int nv = std::min<int>(opts.validate_count, static_cast<int>(idx.size()));
  for (int k = 0; k < nv; ++k) {
    cd lam = eg.values[idx[k]];
    ValidatedPair p = inverse_iterate(op.matrix, lam, rep.op_norm, opts.seed + k);
    if (p.residual > 1e-8)
      throw Error("eig_all: validation residual " + std::to_string(p.residual) + " too large");
    rep.validated.push_back(std::move(p));
  }
  return rep;
}

std::vector<ValidatedPair> eig_near(const ModeOperator& op, cd target, int k) {
  const MatC& a = op.matrix;
  const int n = static_cast<int>(a.rows());
  if (k < 1 || k > n) throw Error("eig_near: bad count");
  double anorm = inf_norm(a);

  MatC as = a;
  cd sh = target;
  std::unique_ptr<LuFactor> lu;
  for (int attempt = 0;; ++attempt) {
    as = a;
    as.diagonal().array() -= sh;
    lu = std::make_unique<LuFactor>(std::move(as));
    if (lu->rcond() > 1e-300) break;
    if (attempt >= 2) throw Error("eig_near: singular shift after perturbation retries");
    sh += 1e-8 * (1.0 + std::abs(sh));
  }

  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  MatC v(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) v(i, j) = cd(g(rng), g(rng));

  auto orthonormalize = [&](MatC& m) {
    for (int j = 0; j < m.cols(); ++j) {
      for (int l = 0; l < j; ++l) m.col(j) -= m.col(l).dot(m.col(j)) * m.col(l);
      m.col(j).normalize();
    }
  };
  orthonormalize(v);

  std::vector<ValidatedPair> pairs(k);
  for (int it = 0; it < 100; ++it) {
    for (int j = 0; j < k; ++j) v.col(j) = lu->solve(v.col(j));
    orthonormalize(v);
    // Rayleigh-Ritz on the block: a single shift cannot split a
    // near-degenerate cluster vector by vector, the projected k x k problem can
    MatC av = a * v;
    MatC h = v.adjoint() * av;
    ComplexEig small = complex_eig(h, true);
    MatC ritz = v * small.vectors;
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      VecC w = ritz.col(j);
      w.normalize();
      cd lam = small.values[j];
      double res = (a * w - lam * w).norm() / anorm;
      pairs[j] = {lam, w, res};
      worst = std::max(worst, res);
    }
    if (worst <= 1e-9) break;
  }
  for (auto& p : pairs)
    if (p.residual > 1e-8)
      throw Error("eig_near: residual " + std::to_string(p.residual) + " exceeds 1e-8");
  std::sort(pairs.begin(), pairs.end(), [&](const ValidatedPair& x, const ValidatedPair& y) {
    return std::abs(x.value - target) < std::abs(y.value - target);
  });
  return pairs;
}

std::vector<GapRow> gap_scan(ModeSpecies species, const CollisionMatrices& cm,
                             const std::vector<double>& s_list, const Frame& frame) {
  std::vector<GapRow> rows(s_list.size());
  for (size_t i = 0; i < s_list.size(); ++i) {
    ModeOperator op = assemble_mode(species, s_list[i], frame, cm);
    SpectrumReport rep = eig_all(op);
    rows[i] = {s_list[i], rep.rightmost.real()};
  }
  return rows;
}

double crossvalidate(const DispersionBranch& branch, ModeSpecies species,
                     const CollisionMatrices& cm, const Frame& frame) {
  double worst = 0.0;
  for (size_t k = 0; k < branch.s.size(); ++k) {
    if (!branch.converged[k]) continue;
    ModeOperator op = assemble_mode(species, branch.s[k], frame, cm);
    ComplexEig eg = complex_eig(op.matrix, false);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < eg.values.size(); ++i)
      best = std::min(best, std::abs(eg.values[i] - branch.lambda[k]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace vmb
