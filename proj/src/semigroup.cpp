#include "vmb/semigroup.hpp"

#include <lapacke.h>
#include <omp.h>

#include <cmath>
#include <map>

namespace vmb {

const char* scenario_name(Scenario sc) {
  switch (sc) {
    case Scenario::two_species_field: return "two_species_field";
    case Scenario::one_magnetic: return "one_magnetic";
    case Scenario::one_electric: return "one_electric";
    case Scenario::boltzmann: return "boltzmann";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario sc : {Scenario::two_species_field, Scenario::one_magnetic,
                      Scenario::one_electric, Scenario::boltzmann})
    if (name == scenario_name(sc)) return sc;
  throw Error("unknown scenario: " + name);
}

ModeSpecies scenario_species(Scenario sc) {
  switch (sc) {
    case Scenario::two_species_field: return ModeSpecies::two_species;
    case Scenario::boltzmann: return ModeSpecies::boltzmann;
    default: return ModeSpecies::one_species;
  }
}

InitialMode make_initial(Scenario sc, const Eigen::Vector3d& xi, const ScenarioParams& params,
                         const VelocityGrid& grid) {
  double s = xi.norm();
  if (s == 0.0) throw Error("make_initial: xi = 0");
  Frame fr = Frame::from_xi(xi);  // throws for xi parallel to e3
  const double c = params.d0 * std::exp(0.5 * params.r0 * params.r0) * std::exp(-0.5 * s * s);

  InitialMode im;
  im.scenario = sc;
  im.xi = xi;
  im.E0.setZero();
  im.B0.setZero();
  im.f0 = GridFunction::Zero(grid.size());

  const GridFunction c0 = chi(0, grid), c4 = chi(4, grid);
  // transverse profiles carry an i relative to the literal (-xi2, xi1, 0)
  // form so the data is conjugate-symmetric in xi (real fields in x space);
  // amplitudes and the theorems' lower-bound hypotheses are unchanged
  const Eigen::Vector3cd that = cd(0, 1) * fr.W1.cast<cd>();
  switch (sc) {
    case Scenario::two_species_field:
      im.B0 = c * that;
      break;
    case Scenario::boltzmann:
      im.f0 = c * (c0 + c4);
      break;
    case Scenario::one_magnetic:
    case Scenario::one_electric: {
      double gamma = (sc == Scenario::one_magnetic) ? s : 1.0;
      im.f0 = c * (gamma * c0 + c4);
      im.B0 = c * that;
      if (sc == Scenario::one_magnetic) {
        // radial part phase-adjusted so i xi.E0 = (f0, chi0) exactly
        cd n0 = inner_product(im.f0, c0, grid);
        im.E0 = (n0 / (cd(0, 1) * s)) * fr.omega.cast<cd>() + c * that;
      } else {
        // Gauss law violated by an O(c) offset
        im.E0 = cd(0, c) * fr.omega.cast<cd>() + c * that;
      }
      break;
    }
  }
  return im;
}

VecC initial_state(const InitialMode& im, const Frame& frame, const VelocityGrid& grid) {
  const int n = grid.size();
  const bool fields = im.scenario != Scenario::boltzmann;
  VecC u = VecC::Zero(fields ? n + 4 : n);
  u.head(n) = grid.sqrtw.asDiagonal() * im.f0;
  if (fields) {
    Eigen::Vector3cd oe = frame.omega.cast<cd>().cross(im.E0);
    Eigen::Vector3cd ob = frame.omega.cast<cd>().cross(im.B0);
    u[n] = oe.dot(frame.W1.cast<cd>());
    u[n + 1] = oe.dot(frame.W2.cast<cd>());
    u[n + 2] = ob.dot(frame.W1.cast<cd>());
    u[n + 3] = ob.dot(frame.W2.cast<cd>());
  }
  return u;
}

std::vector<VecC> cn_propagate(const MatC& a, const VecC& u0, const std::vector<double>& times,
                               double tol) {
  const int n = static_cast<int>(a.rows());
  std::map<double, std::unique_ptr<LuFactor>> factors;  // (I - h/2 A) per step size
  auto solver = [&](double h) -> LuFactor& {
    auto it = factors.find(h);
    if (it == factors.end()) {
      MatC m = MatC::Identity(n, n) - 0.5 * h * a;
      it = factors.emplace(h, std::make_unique<LuFactor>(std::move(m))).first;
      if (factors.size() > 24) factors.erase(factors.begin());
    }
    return *it->second;
  };
  auto advance = [&](VecC u, double h, long nsteps) {
    LuFactor& lu = solver(h);
    VecC rhs(n);
    for (long k = 0; k < nsteps; ++k) {
      rhs.noalias() = u + (0.5 * h) * (a * u);
      u = lu.solve(rhs);
    }
    return u;
  };

  std::vector<VecC> out;
  VecC u = u0;
  double tcur = 0.0;
  double h = 0.1;
  for (double t : times) {
    double span = t - tcur;
    if (span < -1e-12) throw Error("cn_propagate: times must be nondecreasing");
    while (span > 1e-14) {
      long nsteps = std::max<long>(1, static_cast<long>(std::ceil(span / h)));
      double hs = span / nsteps;
      for (int attempt = 0;; ++attempt) {
        // three dyadic levels; Richardson pairs are fourth order and their
        // difference estimates the error of the accepted state
        VecC u1 = advance(u, hs, nsteps);
        VecC u2 = advance(u, 0.5 * hs, 2 * nsteps);
        VecC u4 = advance(u, 0.25 * hs, 4 * nsteps);
        VecC e2 = (4.0 * u2 - u1) / 3.0;
        VecC e4 = (4.0 * u4 - u2) / 3.0;
        double err = (e4 - e2).norm() / std::max(1e-300, e4.norm());
        if (err < tol || hs < 1e-5) {
          u = e4;
          span = 0.0;
          if (err < 1e-3 * tol) h = std::min(0.5, hs * 2.0);
          break;
        }
        if (attempt > 30) throw Error("cn_propagate: step control failed");
        nsteps *= 2;
        hs *= 0.5;
        h = hs;
      }
    }
    tcur = t;
    out.push_back(u);
  }
  return out;
}

PropagateResult propagate_mode(const ModeOperator& op, const VecC& u0,
                               const std::vector<double>& times, const PropagateOptions& opts) {
  if (u0.size() != op.dim()) throw Error("propagate_mode: state dimension mismatch");
  PropagateResult res;
  const double nrm0 = weighted_norm(u0, op);
  if (nrm0 == 0.0) {
    res.states.assign(times.size(), u0);
    return res;
  }

  bool eig_ok = false;
  ComplexEig eg;
  VecC coef;
  std::unique_ptr<LuFactor> vlu;
  try {
    eg = complex_eig(op.matrix, true);
    vlu = std::make_unique<LuFactor>(eg.vectors);
    if (vlu->rcond() >= opts.min_eigenbasis_rcond) {
      coef = vlu->solve(u0);
      double recon = (eg.vectors * coef - u0).norm() / u0.norm();
      eig_ok = recon < 1e-8;
    }
  } catch (const Error&) {
    eig_ok = false;
  }

  auto check_contraction = [&](const std::vector<VecC>& states) {
    double worst = 0.0;
    for (const auto& st : states) worst = std::max(worst, weighted_norm(st, op) / nrm0);
    return worst;
  };

  if (eig_ok) {
    res.states.reserve(times.size());
    for (double t : times) {
      VecC amp(coef.size());
      for (int i = 0; i < coef.size(); ++i) amp[i] = coef[i] * std::exp(eg.values[i] * t);
      res.states.push_back(eg.vectors * amp);
    }
    res.max_growth = check_contraction(res.states);
    if (res.max_growth <= 1.0 + opts.contraction_slack) return res;
  }

  if (!opts.allow_fallback)
    throw Error("propagate_mode: eigendecomposition rejected and fallback disabled");
  res.states = cn_propagate(op.matrix, u0, times, opts.stepper_tol);
  res.used_fallback = true;
  res.max_growth = check_contraction(res.states);
  if (res.max_growth > 1.0 + std::max(opts.contraction_slack, 100 * opts.stepper_tol))
    throw Error("propagate_mode: contraction violated by both methods, growth " +
                std::to_string(res.max_growth));
  return res;
}

ReconstructedFields reconstruct_fields(const VecC& state, const ModeOperator& op) {
  if (!op.has_fields()) throw Error("reconstruct_fields: field-coupled species required");
  const VelocityGrid& g = *op.grid;
  const int n = g.size();
  ReconstructedFields rf;
  rf.f = g.sqrtw.cwiseInverse().asDiagonal() * state.head(n);
  VecR c0 = g.sqrtw.asDiagonal() * g.chi.col(0);
  cd nhat = c0.cast<cd>().dot(state.head(n));
  const Frame& fr = op.frame;
  Eigen::Vector3cd ocx = state[n] * fr.W2.cast<cd>() - state[n + 1] * fr.W1.cast<cd>();
  Eigen::Vector3cd ocy = state[n + 2] * fr.W2.cast<cd>() - state[n + 3] * fr.W1.cast<cd>();
  rf.E = -(cd(0, 1) / op.s) * nhat * fr.omega.cast<cd>() - ocx;
  rf.B = -ocy;
  return rf;
}

XiQuadrature build_xi_quadrature(const ExperimentConfig& cfg) {
  if (!(cfg.s_min > 0 && cfg.s_max > cfg.s_min)) throw Error("xi quadrature: bad radial range");
  if (cfg.radial_nodes < 4) throw Error("xi quadrature: too few radial nodes");
  if (cfg.directions != 14) throw Error("xi quadrature: only the 14-point direction set is built in");

  XiQuadrature q;
  // geometric panels, denser near s = 0 where the slow branches live
  std::vector<double> edges{cfg.s_min};
  while (edges.back() < cfg.s_max) edges.push_back(std::min(cfg.s_max, edges.back() * 4.0));
  int panels = static_cast<int>(edges.size()) - 1;
  int per = std::max(2, (cfg.radial_nodes + panels - 1) / panels);
  // Gauss-Legendre nodes on [0,1] via Golub-Welsch
  std::vector<double> gx(per), gw(per);
  {
    std::vector<double> d(per, 0.0), e(per - 1), z(static_cast<size_t>(per) * per);
    for (int k = 1; k < per; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', per, d.data(), e.data(), z.data(), per);
    for (int i = 0; i < per; ++i) {
      gx[i] = 0.5 * (d[i] + 1.0);
      gw[i] = z[static_cast<size_t>(i) * per] * z[static_cast<size_t>(i) * per];
    }
  }
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < per; ++i) {
      double a = edges[p], b = edges[p + 1];
      q.s.push_back(a + (b - a) * gx[i]);
      q.ws.push_back((b - a) * gw[i]);
    }

  // degree-5 cube rule (6 face + 8 corner points), rotated off the e3 poles
  Eigen::Matrix3d rot = (Eigen::AngleAxisd(0.41, Eigen::Vector3d::UnitY()) *
                         Eigen::AngleAxisd(0.23, Eigen::Vector3d::UnitX()))
                            .toRotationMatrix();
  const double wf = 4.0 * M_PI / 15.0, wc = 3.0 * M_PI / 10.0;
  std::vector<std::pair<Eigen::Vector3d, double>> set;
  for (int axis = 0; axis < 3; ++axis)
    for (double sign : {1.0, -1.0}) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[axis] = sign;
      set.emplace_back(rot * e, wf);
    }
  const double r3 = 1.0 / std::sqrt(3.0);
  for (double sx : {1.0, -1.0})
    for (double sy : {1.0, -1.0})
      for (double sz : {1.0, -1.0}) set.emplace_back(rot * Eigen::Vector3d(sx * r3, sy * r3, sz * r3), wc);

  if (cfg.use_antipodal_symmetry) {
    // per-mode norms are even in xi; keep one of each antipodal pair
    for (auto& [dir, w] : set) {
      bool keep = dir.x() > 0 || (dir.x() == 0 && dir.y() > 0) ||
                  (dir.x() == 0 && dir.y() == 0 && dir.z() > 0);
      if (keep) {
        q.dirs.push_back(dir);
        q.wd.push_back(2.0 * w);
      }
    }
  } else {
    for (auto& [dir, w] : set) {
      q.dirs.push_back(dir);
      q.wd.push_back(w);
    }
  }
  for (const auto& dir : q.dirs)
    if (std::hypot(dir.x(), dir.y()) < 1e-6)
      throw Error("xi quadrature: direction set touches the e3 pole");
  return q;
}

std::vector<double> time_schedule(const ExperimentConfig& cfg) {
  std::vector<double> t{0.0};
  const int n = cfg.time_samples;
  for (int k = 0; k < n; ++k) t.push_back(std::pow(cfg.t_max, double(k) / (n - 1)));
  return t;
}

namespace {

struct ChannelBlock {
  // squared-norm accumulators per time
  std::vector<double> f, E, B, density, momentum, energy, micro, pd, pr;
  explicit ChannelBlock(size_t nt)
      : f(nt, 0), E(nt, 0), B(nt, 0), density(nt, 0), momentum(nt, 0), energy(nt, 0),
        micro(nt, 0), pd(nt, 0), pr(nt, 0) {}
};

}  // namespace

DecayCurve synthesize_decay(const ExperimentConfig& cfg, const CollisionMatrices& cm,
                            bool parallel) {
  const VelocityGrid& g = *cm.grid;
  if (g.n_per_axis != cfg.n_per_axis)
    throw Error("synthesize_decay: collision matrices resolution mismatch");
  XiQuadrature q = build_xi_quadrature(cfg);
  std::vector<double> times = time_schedule(cfg);
  const size_t nt = times.size();
  const ModeSpecies species = scenario_species(cfg.scenario);
  const bool fields = species != ModeSpecies::boltzmann;
  const bool two = species == ModeSpecies::two_species;

  const int nmodes = static_cast<int>(q.s.size() * q.dirs.size());
  std::vector<ChannelBlock> blocks(nmodes, ChannelBlock(nt));
  std::vector<int> failed(nmodes, 0);

  const int n = g.size();
  Eigen::MatrixXd chin = g.sqrtw.asDiagonal() * g.chi;  // moment vectors in coords

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int m = 0; m < nmodes; ++m) {
    const int ir = m / static_cast<int>(q.dirs.size());
    const int id = m % static_cast<int>(q.dirs.size());
    const double s = q.s[ir];
    const Eigen::Vector3d xi = s * q.dirs[id];
    const double wq = q.ws[ir] * s * s * q.wd[id];
    try {
      Frame fr = Frame::from_xi(xi);
      ModeOperator op = assemble_mode(species, s, fr, cm);
      InitialMode im = make_initial(cfg.scenario, xi, cfg.params, g);
      VecC u0 = initial_state(im, fr, g);
      PropagateResult pr_res = propagate_mode(op, u0, times, cfg.prop);
      ChannelBlock& cb = blocks[m];
      for (size_t k = 0; k < nt; ++k) {
        const VecC& st = pr_res.states[k];
        auto fpart = st.head(n);
        double f2 = fpart.squaredNorm();
        cb.f[k] = wq * f2;
        Eigen::Vector4cd mom;
        for (int j = 0; j < 4; ++j) mom[j] = chin.col(j + 1).cast<cd>().dot(fpart);
        cd dens = chin.col(0).cast<cd>().dot(fpart);
        cb.density[k] = wq * std::norm(dens);
        cb.momentum[k] = wq * (std::norm(mom[0]) + std::norm(mom[1]) + std::norm(mom[2]));
        cb.energy[k] = wq * std::norm(mom[3]);
        // macro/micro split through the orthonormalized invariants
        double qd2 = std::norm(g.q.col(0).cast<cd>().dot(fpart));
        if (two) {
          cb.pd[k] = wq * qd2;
          cb.pr[k] = wq * std::max(0.0, f2 - qd2);
        } else {
          double macro2 = qd2;
          for (int j = 1; j < 5; ++j) macro2 += std::norm(g.q.col(j).cast<cd>().dot(fpart));
          cb.micro[k] = wq * std::max(0.0, f2 - macro2);
        }
        if (fields) {
          cb.E[k] = wq * (std::norm(dens) / (s * s) + std::norm(st[n]) + std::norm(st[n + 1]));
          cb.B[k] = wq * (std::norm(st[n + 2]) + std::norm(st[n + 3]));
        }
      }
    } catch (const Error&) {
      failed[m] = 1;
    }
  }

  DecayCurve dc;
  dc.scenario = cfg.scenario;
  dc.quadrature_spec = std::to_string(q.s.size()) + "x" + std::to_string(q.dirs.size()) +
                       " radial x directions, n=" + std::to_string(cfg.n_per_axis);
  dc.t = times;
  dc.total_modes = nmodes;
  for (int m = 0; m < nmodes; ++m) dc.failed_modes += failed[m];
  if (dc.failed_modes > cfg.max_failed_fraction * nmodes)
    throw Error("synthesize_decay: " + std::to_string(dc.failed_modes) +
                " modes failed, exceeding the failure budget");

  auto reduce = [&](auto member) {
    std::vector<double> out(nt, 0.0);
    for (int m = 0; m < nmodes; ++m) {  // fixed order: bit-reproducible
      const auto& v = blocks[m].*member;
      for (size_t k = 0; k < nt; ++k) out[k] += v[k];
    }
    for (auto& x : out) x = std::sqrt(std::max(0.0, x));
    return out;
  };
  dc.f = reduce(&ChannelBlock::f);
  dc.density = reduce(&ChannelBlock::density);
  dc.momentum = reduce(&ChannelBlock::momentum);
  dc.energy = reduce(&ChannelBlock::energy);
  if (fields) {
    dc.E = reduce(&ChannelBlock::E);
    dc.B = reduce(&ChannelBlock::B);
  }
  if (two) {
    dc.pd = reduce(&ChannelBlock::pd);
    dc.pr = reduce(&ChannelBlock::pr);
  } else {
    dc.micro = reduce(&ChannelBlock::micro);
  }
  return dc;
}

FitResult fit_exponent(const std::vector<double>& t, const std::vector<double>& values,
                       double t_lo, double t_hi, FitMode mode) {
  if (t.size() != values.size()) throw Error("fit_exponent: length mismatch");
  std::vector<double> xs, ys;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || t[i] <= 0.0) continue;
    if (!(values[i] > 0.0)) throw Error("fit_exponent: nonpositive value in window, channel dead");
    xs.push_back(mode == FitMode::loglog ? std::log(t[i]) : t[i]);
    ys.push_back(std::log(values[i]));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 8) throw Error("fit_exponent: fewer than 8 samples in window");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  sx /= n;
  sy /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - sx) * (xs[i] - sx);
    sxy += (xs[i] - sx) * (ys[i] - sy);
  }
  FitResult fr;
  fr.slope = sxy / sxx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    double r = ys[i] - sy - fr.slope * (xs[i] - sx);
    ss += r * r;
  }
  fr.stderr_ = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  fr.samples = n;
  return fr;
}

}  // namespace vmb
