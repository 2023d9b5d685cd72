#include "vmb/modes.hpp"

#include <cmath>

namespace vmb {

Frame Frame::canonical() {
  return {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
}

Frame Frame::from_direction(const Eigen::Vector3d& omega_in) {
  Eigen::Vector3d omega = omega_in.normalized();
  Eigen::Vector3d u =
      (std::abs(omega.x()) < 0.9) ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d w1 = (u - u.dot(omega) * omega).normalized();
  return {omega, w1, omega.cross(w1)};
}

Frame Frame::from_xi(const Eigen::Vector3d& xi) {
  double s = xi.norm();
  if (s == 0.0) throw Error("Frame::from_xi: xi = 0");
  double rho = std::hypot(xi.x(), xi.y());
  if (rho < 1e-12 * s) throw Error("Frame::from_xi: xi parallel to e3, transverse vector undefined");
  Eigen::Vector3d omega = xi / s;
  Eigen::Vector3d w1(-xi.y() / rho, xi.x() / rho, 0.0);
  return {omega, w1, omega.cross(w1)};
}

double Frame::orthonormality_defect() const {
  double d = 0.0;
  d = std::max(d, std::abs(omega.norm() - 1.0));
  d = std::max(d, std::abs(W1.norm() - 1.0));
  d = std::max(d, std::abs(W2.norm() - 1.0));
  d = std::max(d, (omega.cross(W1) - W2).norm());
  d = std::max(d, (omega.cross(W2) + W1).norm());
  return d;
}

ModeOperator assemble_mode(ModeSpecies species, double s, const Frame& frame,
                           const CollisionMatrices& cm) {
  if (!(s > 0.0)) throw Error("assemble_mode: s must be positive (s^{-2} P_d term)");
  if (frame.orthonormality_defect() > 1e-12) throw Error("assemble_mode: frame not orthonormal");
  const VelocityGrid& g = *cm.grid;
  const int n = g.size();
  const bool fields = species != ModeSpecies::boltzmann;
  const int dim = fields ? n + 4 : n;
  const cd I(0.0, 1.0);

  ModeOperator op;
  op.species = species;
  op.s = s;
  op.frame = frame;
  op.grid = cm.grid;
  op.matrix.setZero(dim, dim);

  const MatR& Lmat = (species == ModeSpecies::two_species) ? cm.L1 : cm.L;
  op.matrix.topLeftCorner(n, n) = Lmat.cast<cd>();

  VecR vom(n), cw1(n), cw2(n);
  for (int a = 0; a < n; ++a) {
    vom[a] = g.nodes[a].dot(frame.omega);
    double sm = g.sqrtw[a] * std::sqrt(maxwellian(g.nodes[a]));
    cw1[a] = g.nodes[a].dot(frame.W1) * sm;
    cw2[a] = g.nodes[a].dot(frame.W2) * sm;
  }
  for (int a = 0; a < n; ++a) op.matrix(a, a) -= I * s * vom[a];

  if (fields) {
    // - i (v.xi)/|xi|^2 P_d
    VecR c0 = g.sqrtw.asDiagonal() * g.chi.col(0);
    VecR vc0 = vom.cwiseProduct(c0);
    op.matrix.topLeftCorner(n, n).noalias() -= (I / s) * (vc0 * c0.transpose()).cast<cd>();

    // field coupling -v sqrt(M) . (omega x E)
    op.matrix.col(n).head(n) = -cw2.cast<cd>();
    op.matrix.col(n + 1).head(n) = cw1.cast<cd>();
    // -omega x P_m f
    op.matrix.row(n).head(n) = cw2.transpose().cast<cd>();
    op.matrix.row(n + 1).head(n) = -cw1.transpose().cast<cd>();
    // Maxwell rotation blocks i xi x in tangent coordinates
    op.matrix(n, n + 3) = -I * s;
    op.matrix(n + 1, n + 2) = I * s;
    op.matrix(n + 2, n + 1) = I * s;
    op.matrix(n + 3, n) = -I * s;
  }
  return op;
}

cd weighted_inner(const VecC& u, const VecC& v, const ModeOperator& op) {
  if (u.size() != op.dim() || v.size() != op.dim()) throw Error("weighted_inner: dim mismatch");
  cd r = (v.conjugate().array() * u.array()).sum();
  if (op.has_fields()) {
    const int n = op.n_velocity();
    VecC c0 = op.grid->q.col(0).cast<cd>();
    cd pu = c0.dot(u.head(n));  // Eigen dot conjugates the left argument
    cd pv = c0.dot(v.head(n));
    r += pu * std::conj(pv) / (op.s * op.s);
  }
  return r;
}

double weighted_norm(const VecC& u, const ModeOperator& op) {
  return std::sqrt(std::max(0.0, std::real(weighted_inner(u, u, op))));
}

Eigen::Matrix<cd, 9, 9> g6_matrix(double s) {
  if (!(s > 0.0)) throw Error("g6_matrix: s must be positive");
  const cd I(0.0, 1.0);
  Eigen::Matrix<cd, 9, 9> m = Eigen::Matrix<cd, 9, 9>::Zero();
  const double r23 = std::sqrt(2.0 / 3.0);
  m(0, 1) = -I * s;
  m(1, 0) = -I * (s + 1.0 / s);
  m(1, 4) = -I * s * r23;
  m(4, 1) = -I * s * r23;
  m(2, 6) = 1.0;
  m(3, 5) = -1.0;
  m(5, 3) = 1.0;
  m(5, 8) = -I * s;
  m(6, 2) = -1.0;
  m(6, 7) = I * s;
  m(7, 6) = I * s;
  m(8, 5) = -I * s;
  return m;
}

std::array<cd, 9> g6_eigenvalues_closed(double s) {
  const cd I(0.0, 1.0);
  double a = std::sqrt(1.0 + 5.0 / 3.0 * s * s);
  double b = std::sqrt(1.0 + s * s);
  return {cd(0.0), cd(0.0), cd(0.0), I * a, -I * a, -I * b, -I * b, I * b, I * b};
}

}  // namespace vmb
