#include "acc/crack.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "acc/baselines.hpp"
#include "acc/reduction.hpp"
#include "acc/solvers.hpp"

namespace acc {

CrackModel make_crack_model(int n_atoms, double load, Potential pot,
                            int n_broken) {
  CrackModel m;
  m.chain = make_chain(n_atoms, pot, BoundarySpec{BoundaryKind::Traction, load});
  m.load = load;
  m.n_broken = (n_broken > 0) ? n_broken : n_atoms / 2 + 2;
  if (m.n_broken < 1 || m.n_broken >= n_atoms)
    throw std::invalid_argument("tip bond index out of range");
  return m;
}

namespace {
double gamma_scale(const CrackModel& m) {
  double s = m.k2 / (m.u_cut * m.u_cut);
  if (m.gamma_as_printed) s /= m.chain.epsilon * m.chain.epsilon;
  return s;
}
}  // namespace

double gamma_energy(const CrackModel& m, double u) {
  if (u <= 0.0) return 0.0;
  double w = std::min(u, m.u_cut), c = m.u_cut;
  // int_0^w v (v - c)^2 dv
  double quartic = w * w * (w * w / 4.0 - 2.0 * c * w / 3.0 + c * c / 2.0);
  return gamma_scale(m) * quartic;
}

double gamma_d1(const CrackModel& m, double u) {
  if (u <= 0.0 || u >= m.u_cut) return 0.0;
  double d = u - m.u_cut;
  return gamma_scale(m) * u * d * d;
}

double gamma_d2(const CrackModel& m, double u) {
  if (u <= 0.0 || u >= m.u_cut) return 0.0;
  return gamma_scale(m) * (u - m.u_cut) * (3.0 * u - m.u_cut);
}

Vec traction_forces(const CrackModel& m) {
  // linearized spring constants at the reference state
  double k0 = shell_d2(m.chain.potential, 1, 1.0);
  double k1 = shell_d2(m.chain.potential, 2, 2.0);
  Vec f = Vec::Zero(m.chain.n_atoms);
  if (m.load_consistent) {
    f[0] = (k0 + 2.0 * k1) / (k0 + 4.0 * k1) * m.load;
    f[1] = 2.0 * k1 / (k0 + 4.0 * k1) * m.load;
  } else {
    f[0] = m.load;
  }
  return f;
}

double crack_energy(const CrackModel& m, const Vec& u) {
  double e = total_energy(m.chain, u, custom_force(traction_forces(m)));
  int tip = m.tip_atom();
  e += (m.n_broken - 1) * gamma0(m) + gamma_energy(m, u[tip]);
  double inv_eps = 1.0 / m.chain.epsilon;
  for (int j = tip + 1; j < m.chain.n_atoms; ++j)
    e += m.k2 * (u[j] * inv_eps) * (u[j] * inv_eps);
  return e;
}

namespace {

// adds the vertical-bond terms to an elastic Model's residual/Hessian
Model with_vertical_bonds(const CrackModel& cm, Model base) {
  int tip = cm.tip_atom();
  double eps2 = cm.chain.epsilon * cm.chain.epsilon;
  std::vector<char> pinned(base.n_atoms, 0);
  for (int p : base.pinned) pinned[p] = 1;
  auto res0 = base.scaled_residual;
  auto hes0 = base.scaled_hessian;
  CrackModel cmc = cm;
  base.scaled_residual = [cmc, res0, tip, eps2, pinned](const Vec& u) {
    Vec r = res0(u);
    if (!pinned[tip]) r[tip] -= eps2 * gamma_d1(cmc, u[tip]);
    for (int j = tip + 1; j < u.size(); ++j)
      if (!pinned[j]) r[j] -= 2.0 * cmc.k2 * u[j];
    return r;
  };
  base.scaled_hessian = [cmc, hes0, tip, eps2, pinned](const Vec& u) {
    SpMat h = hes0(u);
    std::vector<Triplet> trip;
    if (!pinned[tip]) trip.emplace_back(tip, tip, eps2 * gamma_d2(cmc, u[tip]));
    for (int j = tip + 1; j < u.size(); ++j)
      if (!pinned[j]) trip.emplace_back(j, j, 2.0 * cmc.k2);
    SpMat d(u.size(), u.size());
    d.setFromTriplets(trip.begin(), trip.end());
    return SpMat(h + d);
  };
  return base;
}

SolveReport newton_report(const Model& m, const std::string& tag,
                          const NewtonOptions& opts, const Vec* u0) {
  NewtonResult res = newton(m.scaled_residual, m.scaled_hessian,
                            u0 ? *u0 : Vec::Zero(m.n_atoms), opts);
  SolveReport rep;
  rep.u = res.u;
  rep.coeffs = res.u;
  rep.residual_norm = res.final_residual;
  rep.newton_iters = res.iterations;
  rep.method_tag = tag;
  return rep;
}

}  // namespace

Model crack_equations(const CrackModel& m) {
  return with_vertical_bonds(
      m, chain_model(m.chain, custom_force(traction_forces(m))));
}

SolveReport solve_crack(const CrackModel& m, CrackMethod method,
                        const CGMap* cg, const EnrichmentConfig& enrich,
                        const NewtonOptions& opts, const Vec* u0) {
  ExternalForce f = custom_force(traction_forces(m));
  switch (method) {
    case CrackMethod::Atomistic:
      return newton_report(crack_equations(m), "atomistic", opts, u0);
    case CrackMethod::Galerkin: {
      if (!cg) throw std::invalid_argument("galerkin solve needs a CGMap");
      return solve_projected(crack_equations(m), *cg, nullptr, "galerkin",
                             opts);
    }
    case CrackMethod::Enriched: {
      if (!cg) throw std::invalid_argument("enriched solve needs a CGMap");
      Model eqs = crack_equations(m);
      SpMat a = eqs.scaled_hessian(Vec::Zero(m.chain.n_atoms));
      KrylovBasis kb = build_enrichment(*cg, a, enrich);
      return solve_projected(eqs, *cg, &kb.vectors, "enriched", opts);
    }
    case CrackMethod::Qnl: {
      if (!cg) throw std::invalid_argument("qnl solve needs a partition");
      Model eqs = with_vertical_bonds(m, qnl_model(m.chain, cg->partition, f));
      return newton_report(eqs, "qnl", opts, u0);
    }
    case CrackMethod::ForceBased: {
      if (!cg)
        throw std::invalid_argument("force_based solve needs a partition");
      Model eqs =
          with_vertical_bonds(m, force_based_model(m.chain, cg->partition, f));
      return newton_report(eqs, "force_based", opts, u0);
    }
  }
  throw std::invalid_argument("unknown crack method");
}

namespace {

// one continuation problem: equations in the method's own coordinates
struct BifProblem {
  int dim = 0;
  std::vector<int> pinned;  ///< coordinate indices held at zero
  std::function<Vec(const Vec&, double)> residual;    ///< (x, load)
  std::function<SpMat(const Vec&, double)> jacobian;
  std::function<double(const Vec&)> u_first;
  std::function<double(const Vec&)> u_tip;
  std::function<void(Vec&, double)> bump_tip;
  std::string tag;
};

BifProblem make_problem(const CrackModel& m, CrackMethod method,
                        const CGMap* cg) {
  BifProblem p;
  int tip = m.tip_atom();
  auto model_at = [m, method, cg](double load) {
    CrackModel c = m;
    c.load = load;
    c.chain.boundary.load = load;
    if (method == CrackMethod::Qnl)
      return with_vertical_bonds(
          c, qnl_model(c.chain, cg->partition,
                       custom_force(traction_forces(c))));
    return crack_equations(c);
  };
  if (method == CrackMethod::Atomistic || method == CrackMethod::Qnl) {
    if (method == CrackMethod::Qnl && !cg)
      throw std::invalid_argument("qnl sweep needs a partition");
    p.dim = m.chain.n_atoms;
    p.pinned = pinned_atoms(m.chain);
    p.residual = [model_at](const Vec& x, double load) {
      return model_at(load).scaled_residual(x);
    };
    p.jacobian = [model_at](const Vec& x, double load) {
      return model_at(load).scaled_hessian(x);
    };
    p.u_first = [](const Vec& x) { return x[0]; };
    p.u_tip = [tip](const Vec& x) { return x[tip]; };
    p.bump_tip = [tip](Vec& x, double d) { x[tip] += d; };
    p.tag = (method == CrackMethod::Qnl) ? "qnl" : "atomistic";
    return p;
  }
  if (method != CrackMethod::Galerkin)
    throw std::invalid_argument(
        "bifurcation sweep supports atomistic, galerkin and qnl");
  if (!cg) throw std::invalid_argument("galerkin sweep needs a CGMap");
  int tip_dof = cg->dof_of_atom(tip);
  if (tip_dof < 0)
    throw InvalidPartition("tip atom must be a coarse variable");
  p.dim = cg->n;
  for (int a : pinned_atoms(m.chain)) {
    int d = cg->dof_of_atom(a);
    if (d < 0) throw InvalidPartition("pinned atom is not a coarse variable");
    p.pinned.push_back(d);
  }
  const SpMat& phi = cg->phi;
  auto pinnedv = p.pinned;
  p.residual = [model_at, phi, pinnedv](const Vec& c, double load) {
    Model eq = model_at(load);
    Vec rho = phi * eq.scaled_residual(phi.transpose() * c);
    for (int d : pinnedv) rho[d] = -c[d];
    return rho;
  };
  p.jacobian = [model_at, phi, pinnedv](const Vec& c, double load) {
    Model eq = model_at(load);
    SpMat h = eq.scaled_hessian(phi.transpose() * c);
    SpMat j = SpMat(phi * SpMat(h * SpMat(phi.transpose())));
    replace_rows_identity(j, pinnedv);
    return j;
  };
  p.u_first = [phi](const Vec& c) { return (phi.transpose() * c)[0]; };
  p.u_tip = [phi, tip](const Vec& c) { return (phi.transpose() * c)[tip]; };
  p.bump_tip = [tip_dof](Vec& c, double d) { c[tip_dof] += d; };
  p.tag = "galerkin";
  return p;
}

Vec free_spectrum(const BifProblem& p, const Vec& x, double load) {
  SpMat j = p.jacobian(x, load);
  std::vector<char> pin(p.dim, 0);
  for (int d : p.pinned) pin[d] = 1;
  std::vector<int> free;
  for (int i = 0; i < p.dim; ++i)
    if (!pin[i]) free.push_back(i);
  Mat dense = Mat::Zero(free.size(), free.size());
  std::vector<int> pos(p.dim, -1);
  for (size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  for (int k = 0; k < j.outerSize(); ++k)
    for (SpMat::InnerIterator it(j, k); it; ++it) {
      int r = pos[it.row()], c = pos[it.col()];
      if (r >= 0 && c >= 0) dense(r, c) = it.value();
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (dense + dense.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

BifurcationResult bifurcation_sweep(const CrackModel& m, CrackMethod method,
                                    const CGMap* cg, double load_lo,
                                    double load_hi, int steps) {
  if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
  BifProblem p = make_problem(m, method, cg);
  NewtonOptions nopts;
  nopts.tol = 1e-10;
  nopts.max_iters = 30;

  auto try_solve = [&](double load, const Vec& x0) -> std::optional<Vec> {
    try {
      NewtonResult r = newton([&](const Vec& x) { return p.residual(x, load); },
                              [&](const Vec& x) { return p.jacobian(x, load); },
                              x0, nopts);
      return r.u;
    } catch (const SolverError&) {
      return std::nullopt;
    }
  };

  BifurcationResult out;
  out.method_tag = p.tag;
  auto record = [&](double load, const Vec& x, const char* branch) {
    BifPoint pt;
    pt.load = load;
    pt.u_first = p.u_first(x);
    pt.u_tip = p.u_tip(x);
    Vec ev = free_spectrum(p, x, load);
    pt.min_eig = ev[0];
    pt.n_neg = static_cast<int>((ev.array() < 0.0).count());
    pt.stable = pt.min_eig > 0.0;
    pt.branch = branch;
    out.points.push_back(pt);
  };

  if (load_hi <= load_lo) {
    // linear-response range: load moving the tip to u_cut, with margin
    Vec x0 = Vec::Zero(p.dim);
    SpMat j = p.jacobian(x0, 1.0);
    Vec x1 = direct_solve(j, p.residual(x0, 1.0), Symmetry::General);
    double ut = p.u_tip(x1);
    if (ut <= 0) throw BranchLost("no opening response at unit load");
    double scale = m.u_cut / ut;
    load_lo = 0.05 * scale;
    load_hi = 1.6 * scale;
  }

  // Bracket a fold between on-branch (a, xa) and off-branch (b, xb) loads.
  // Midpoint solves are classified by whichever tip opening they are nearer;
  // the gap between the anchors shrinks with the bracket, so the
  // classification stays sharp as the branches merge at the turning point.
  auto bisect_fold = [&](double a, Vec xa, double b, Vec xb, double dp,
                         const char* branch,
                         std::vector<std::pair<double, Vec>>& trace) {
    while (std::abs(b - a) > std::abs(dp) * 1e-6) {
      double mid = 0.5 * (a + b);
      auto xm = try_solve(mid, xa);
      if (xm && std::abs(p.u_tip(*xm) - p.u_tip(xa)) <
                    std::abs(p.u_tip(*xm) - p.u_tip(xb))) {
        a = mid;
        xa = *xm;
        record(a, xa, branch);
        trace.emplace_back(a, xa);
      } else {
        b = mid;
        if (xm) xb = *xm;
      }
    }
    return a;
  };

  // one directed pass with warm starts; a Newton failure or a jump in the
  // tip opening marks a fold, refined by bisection
  auto sweep = [&](double from, double to, Vec x, const char* branch,
                   std::vector<std::pair<double, Vec>>& trace)
      -> std::optional<double> {
    double dp = (to - from) / steps;
    double jump_tol = 0.2 * m.u_cut;
    double load = from;
    record(load, x, branch);
    trace.emplace_back(load, x);
    double step = dp;
    while (std::abs(to - load) > 1e-12 * std::abs(to - from)) {
      if (std::abs(step) > std::abs(to - load)) step = to - load;
      auto next = try_solve(load + step, x);
      if (next) {
        if (std::abs(p.u_tip(*next) - p.u_tip(x)) > jump_tol)
          return bisect_fold(load, x, load + step, *next, dp, branch, trace);
        load += step;
        x = *next;
        record(load, x, branch);
        trace.emplace_back(load, x);
        step = dp;
        continue;
      }
      step *= 0.5;
      if (std::abs(step) < std::abs(dp) * 1e-4) return load;  // fold bracket
    }
    return std::nullopt;
  };

  std::vector<std::pair<double, Vec>> lower_trace, upper_trace;

  auto seed0 = try_solve(load_lo, Vec::Zero(p.dim));
  if (!seed0) throw BranchLost("cannot seed the lower branch");
  std::optional<double> fold_up =
      sweep(load_lo, load_hi, *seed0, "lower", lower_trace);
  if (fold_up) out.folds.push_back(*fold_up);

  // broken-bond branch: push the tip past the cutoff at the top load
  Vec xhi = lower_trace.back().second;
  p.bump_tip(xhi, 2.0 * m.u_cut);
  auto seed1 = try_solve(load_hi, xhi);
  if (seed1 && p.u_tip(*seed1) >
                   p.u_tip(lower_trace.back().second) + 1e-9) {
    std::optional<double> fold_dn =
        sweep(load_hi, load_lo, *seed1, "upper", upper_trace);
    if (fold_dn) out.folds.push_back(*fold_dn);

    // unstable connector, seeded between the outer branches
    if (fold_up && fold_dn && *fold_dn < *fold_up) {
      auto nearest = [](const std::vector<std::pair<double, Vec>>& tr,
                        double load) -> const Vec& {
        size_t best = 0;
        for (size_t i = 1; i < tr.size(); ++i)
          if (std::abs(tr[i].first - load) < std::abs(tr[best].first - load))
            best = i;
        return tr[best].second;
      };
      int mid_steps = std::max(steps / 2, 4);
      for (int i = 1; i < mid_steps; ++i) {
        double load = *fold_dn + (*fold_up - *fold_dn) * i / mid_steps;
        Vec guess = 0.5 * (nearest(lower_trace, load) +
                           nearest(upper_trace, load));
        auto mid = try_solve(load, guess);
        if (!mid) continue;
        double ut = p.u_tip(*mid);
        double lo_ut = p.u_tip(nearest(lower_trace, load));
        double hi_ut = p.u_tip(nearest(upper_trace, load));
        if (ut > lo_ut + 1e-9 && ut < hi_ut - 1e-9)
          record(load, *mid, "middle");
      }
    }
  }
  std::sort(out.folds.begin(), out.folds.end());
  return out;
}

}  // namespace acc
