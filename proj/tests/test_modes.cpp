#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "vmb/linalg.hpp"
#include "vmb/modes.hpp"

using namespace vmb;

namespace {

double multiset_distance(VecC a, VecC b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (int i = 0; i < a.size(); ++i) {
    double best = 1e18;
    int bj = -1;
    for (int j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(a[i] - b[j]);
      if (d < best) {
        best = d;
        bj = j;
      }
    }
    used[bj] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

VecC random_state(int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  VecC u(dim);
  for (int i = 0; i < dim; ++i) u[i] = cd(d(rng), d(rng));
  return u;
}

}  // namespace

TEST_CASE("frames: canonical, from direction, from xi, pole exclusion") {
  CHECK(Frame::canonical().orthonormality_defect() <= 1e-15);
  Frame f = Frame::from_direction(Eigen::Vector3d(1.0, -2.0, 0.5));
  CHECK(f.orthonormality_defect() <= 1e-14);
  Frame fx = Frame::from_xi(Eigen::Vector3d(0.3, 0.4, 1.0));
  CHECK(fx.orthonormality_defect() <= 1e-14);
  CHECK(std::abs(fx.W1.z()) <= 1e-15);  // transverse vector (-xi2, xi1, 0)/rho
  CHECK_THROWS_AS(Frame::from_xi(Eigen::Vector3d(0, 0, 2.0)), Error);
  CHECK_THROWS_AS(Frame::from_xi(Eigen::Vector3d::Zero()), Error);
}

TEST_CASE("mode assembly: dimensions, s = 0 rejected") {
  auto cm = vmbtest::cm8();
  ModeOperator b = assemble_mode(ModeSpecies::boltzmann, 0.5, Frame::canonical(), *cm);
  CHECK(b.dim() == cm->grid->size());
  ModeOperator t = assemble_mode(ModeSpecies::two_species, 0.5, Frame::canonical(), *cm);
  CHECK(t.dim() == cm->grid->size() + 4);
  CHECK_THROWS_AS(assemble_mode(ModeSpecies::one_species, 0.0, Frame::canonical(), *cm), Error);
  CHECK_THROWS_AS(assemble_mode(ModeSpecies::one_species, -1.0, Frame::canonical(), *cm), Error);
}

TEST_CASE("pure Maxwell sub-block has eigenvalues +- i s") {
  auto cm = vmbtest::cm8();
  for (double s : {0.3, 2.0, 17.0}) {
    ModeOperator op = assemble_mode(ModeSpecies::two_species, s, Frame::canonical(), *cm);
    int n = op.n_velocity();
    MatC mb = op.matrix.block(n, n, 4, 4);
    ComplexEig eg = complex_eig(mb, false);
    VecC expect(4);
    expect << cd(0, s), cd(0, s), cd(0, -s), cd(0, -s);
    CHECK(multiset_distance(eg.values, expect) <= 1e-12 * s);
  }
}

TEST_CASE("dissipativity: Re (A U, U)_xi equals (L f, f) and is nonpositive") {
  auto cm = vmbtest::cm8();
  for (auto species : {ModeSpecies::two_species, ModeSpecies::one_species}) {
    const MatR& lm = (species == ModeSpecies::two_species) ? cm->L1 : cm->L;
    for (double s : {0.05, 1.0, 12.0}) {
      Eigen::Vector3d omega = Eigen::Vector3d(0.2, 0.9, -0.4).normalized();
      ModeOperator op = assemble_mode(species, s, Frame::from_direction(omega), *cm);
      for (int rep = 0; rep < 30; ++rep) {
        VecC u = random_state(op.dim(), 100 * rep + static_cast<int>(10 * s));
        cd auu = weighted_inner(VecC(op.matrix * u), u, op);
        double lff = std::real(u.head(op.n_velocity()).dot(lm.cast<cd>() * u.head(op.n_velocity())));
        CHECK(std::abs(std::real(auu) - lff) <= 1e-10 * u.squaredNorm());
        CHECK(std::real(auu) <= 1e-10 * u.squaredNorm());
      }
    }
  }
}

TEST_CASE("conjugation: spectra at (s, omega) and (s, -omega) are conjugate multisets") {
  auto cm = vmbtest::cm8();
  Eigen::Vector3d omega = Eigen::Vector3d(0.6, -0.3, 0.74).normalized();
  for (auto species : {ModeSpecies::two_species, ModeSpecies::boltzmann}) {
    ModeOperator a = assemble_mode(species, 0.8, Frame::from_direction(omega), *cm);
    ModeOperator b = assemble_mode(species, 0.8, Frame::from_direction(-omega), *cm);
    VecC ea = complex_eig(a.matrix, false).values;
    VecC eb = complex_eig(b.matrix, false).values.conjugate();
    // compare above the essential cluster where eigenvalues are well separated
    std::vector<cd> fa, fb;
    for (int i = 0; i < ea.size(); ++i)
      if (ea[i].real() > -2.0) fa.push_back(ea[i]);
    for (int i = 0; i < eb.size(); ++i)
      if (eb[i].real() > -2.0) fb.push_back(eb[i]);
    REQUIRE(fa.size() == fb.size());
    REQUIRE(fa.size() > 0);
    VecC va = Eigen::Map<VecC>(fa.data(), fa.size());
    VecC vb = Eigen::Map<VecC>(fb.data(), fb.size());
    CHECK(multiset_distance(va, vb) <= 1e-8);
  }
}

TEST_CASE("weighted norm: chi1 state, chi0 state, domination") {
  auto cm = vmbtest::cm8();
  const VelocityGrid& g = *cm->grid;
  ModeOperator op = assemble_mode(ModeSpecies::two_species, 1.0, Frame::canonical(), *cm);
  VecC u = VecC::Zero(op.dim());
  u.head(g.size()) = g.sqrtw.asDiagonal() * chi(1, g);
  CHECK(std::abs(weighted_norm(u, op) - 1.0) <= 1e-8);

  VecC u0 = VecC::Zero(op.dim());
  u0.head(g.size()) = g.sqrtw.asDiagonal() * chi(0, g);
  CHECK(std::abs(weighted_norm(u0, op) - std::sqrt(2.0)) <= 1e-8);

  for (int rep = 0; rep < 10; ++rep) {
    VecC w = random_state(op.dim(), rep);
    CHECK(weighted_norm(w, op) >= w.norm() - 1e-12);
  }
}

TEST_CASE("frame gauge invariance of spectra") {
  auto cm = vmbtest::cm8();
  Eigen::Vector3d omega = Eigen::Vector3d(0.1, 0.7, 0.7).normalized();
  Frame f1 = Frame::from_direction(omega);
  Eigen::Vector3d w1 = (std::cos(0.6) * f1.W1 + std::sin(0.6) * f1.W2).normalized();
  Frame f2{omega, w1, omega.cross(w1)};
  ModeOperator a = assemble_mode(ModeSpecies::one_species, 0.9, f1, *cm);
  ModeOperator b = assemble_mode(ModeSpecies::one_species, 0.9, f2, *cm);
  // unitary equivalence is exact; compare the interesting half-plane
  VecC ea = complex_eig(a.matrix, false).values;
  VecC eb = complex_eig(b.matrix, false).values;
  std::vector<cd> fa, fb;
  for (int i = 0; i < ea.size(); ++i)
    if (ea[i].real() > -2.0) fa.push_back(ea[i]);
  for (int i = 0; i < eb.size(); ++i)
    if (eb[i].real() > -2.0) fb.push_back(eb[i]);
  REQUIRE(fa.size() == fb.size());
  VecC va = Eigen::Map<VecC>(fa.data(), fa.size());
  VecC vb = Eigen::Map<VecC>(fb.data(), fb.size());
  CHECK(multiset_distance(va, vb) <= 1e-10);
}

TEST_CASE("direction robustness shrinks under refinement") {
  Eigen::Vector3d omega = Eigen::Vector3d(0.48, -0.6, 0.64).normalized();
  auto defect = [&](const CollisionMatrices& cm) {
    ModeOperator a = assemble_mode(ModeSpecies::two_species, 0.8, Frame::canonical(), cm);
    ModeOperator b = assemble_mode(ModeSpecies::two_species, 0.8, Frame::from_direction(omega), cm);
    VecC ea = complex_eig(a.matrix, false).values;
    VecC eb = complex_eig(b.matrix, false).values;
    double cut = -collision_frequency(Eigen::Vector3d::Zero()) / 2;
    std::vector<cd> fa, fb;
    for (int i = 0; i < ea.size(); ++i)
      if (ea[i].real() > cut) fa.push_back(ea[i]);
    for (int i = 0; i < eb.size(); ++i)
      if (eb[i].real() > cut) fb.push_back(eb[i]);
    REQUIRE(fa.size() == fb.size());
    VecC va = Eigen::Map<VecC>(fa.data(), fa.size());
    VecC vb = Eigen::Map<VecC>(fb.data(), fb.size());
    return multiset_distance(va, vb);
  };
  double d8 = defect(*vmbtest::cm8());
  double d12 = defect(*vmbtest::cm12());
  CHECK(d12 <= 1e-3);
  CHECK(d12 < d8);
}

TEST_CASE("G6: closed form vs dense eigensolve, limits") {
  for (double s : {0.1, 0.5, 1.0}) {
    auto closed = g6_eigenvalues_closed(s);
    VecC cl(9);
    for (int i = 0; i < 9; ++i) cl[i] = closed[i];
    VecC ev = complex_eig(MatC(g6_matrix(s)), false).values;
    CHECK(multiset_distance(ev, cl) <= 1e-10);
  }
  auto lim = g6_eigenvalues_closed(1e-9);
  VecC expect(9);
  expect << 0, 0, 0, cd(0, 1), cd(0, -1), cd(0, -1), cd(0, -1), cd(0, 1), cd(0, 1);
  VecC got(9);
  for (int i = 0; i < 9; ++i) got[i] = lim[i];
  CHECK(multiset_distance(got, expect) <= 1e-8);
  CHECK(std::abs(g6_eigenvalues_closed(1.0)[3] - cd(0, std::sqrt(8.0 / 3.0))) <= 1e-14);

  // i G6 self-adjoint in the weighted metric: eigenvalues purely imaginary
  VecC ev = complex_eig(MatC(g6_matrix(0.7)), false).values;
  for (int i = 0; i < 9; ++i) CHECK(std::abs(ev[i].real()) <= 1e-12);
}

TEST_CASE("boltzmann mode at small s keeps a five-dimensional near-null space") {
  auto cm = vmbtest::cm8();
  ModeOperator op = assemble_mode(ModeSpecies::boltzmann, 1e-3, Frame::canonical(), *cm);
  VecC ev = complex_eig(op.matrix, false).values;
  int close = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= 1e-2 * cm->diag.norm_L) ++close;
  CHECK(close == 5);
}
