#include "acc/baselines.hpp"

#include "acc/quadrature.hpp"
#include "acc/solvers.hpp"

namespace acc {

std::vector<char> atomistic_mask(const RegionPartition& part, int n_atoms) {
  std::vector<char> mask(n_atoms, 0);
  for (const Segment& s : part.segments) {
    if (!s.atomistic) continue;
    if (s.first < 0 || s.last >= n_atoms || s.first > s.last)
      throw InvalidPartition("segment out of range");
    for (int j = s.first; j <= s.last; ++j) mask[j] = 1;
  }
  return mask;
}

namespace {

struct Ctx {
  Chain chain;
  std::vector<char> mask;
  std::vector<int> pinned;
  Vec fext;  // per-atom samples
  bool extrapolated = false;

  bool bond_atomistic(int j) const {
    return mask[j] && mask[j + 1] && mask[j + 2];
  }
};

Ctx make_ctx(const Chain& chain, const RegionPartition& part,
             const ExternalForce& f) {
  Ctx c{chain, atomistic_mask(part, chain.n_atoms), pinned_atoms(chain),
        f.sample(chain),
        chain.boundary.kind == BoundaryKind::DirichletExtrapolated};
  return c;
}

Vec qnl_residual(const Ctx& ctx, const Vec& u) {
  const Chain& c = ctx.chain;
  int n = c.n_atoms;
  double eps = c.epsilon;
  Vec r = eps * eps * ctx.fext;
  for (int j = 0; j + 1 < n; ++j) {
    double d1 = shell_d1(c.potential, 1, 1.0 + (u[j + 1] - u[j]) / eps);
    r[j] += eps * d1;
    r[j + 1] -= eps * d1;
  }
  // one half of a split bond, living on the gap (a, a+1)
  auto half = [&](int a) {
    double d1 = shell_d1(c.potential, 2, 2.0 + 2.0 * (u[a + 1] - u[a]) / eps);
    r[a] += eps * d1;
    r[a + 1] -= eps * d1;
  };
  for (int j = 0; j + 2 < n; ++j) {
    if (ctx.bond_atomistic(j)) {
      double d1 = shell_d1(c.potential, 2, 2.0 + (u[j + 2] - u[j]) / eps);
      r[j] += eps * d1;
      r[j + 2] -= eps * d1;
    } else {
      half(j);
      half(j + 1);
    }
  }
  if (ctx.extrapolated) {
    if (ctx.mask[0]) {
      double ug = ghost_extrapolation(u[0], u[1], u[2]);
      r[1] -= eps * shell_d1(c.potential, 2, 2.0 + (u[1] - ug) / eps);
    } else {
      half(0);  // inside half of the bond (-1, 1)
    }
    if (ctx.mask[n - 1]) {
      double vg = ghost_extrapolation(u[n - 1], u[n - 2], u[n - 3]);
      r[n - 2] += eps * shell_d1(c.potential, 2, 2.0 + (vg - u[n - 2]) / eps);
    } else {
      half(n - 2);  // inside half of the bond (n-2, n)
    }
  }
  for (int p : ctx.pinned) r[p] = -u[p];
  return r;
}

SpMat qnl_hessian(const Ctx& ctx, const Vec& u) {
  const Chain& c = ctx.chain;
  int n = c.n_atoms;
  double eps = c.epsilon;
  std::vector<char> pinned(n, 0);
  for (int p : ctx.pinned) pinned[p] = 1;
  std::vector<Triplet> trip;
  trip.reserve(8 * n);
  auto add = [&](int row, int col, double v) {
    if (!pinned[row]) trip.emplace_back(row, col, v);
  };
  auto pair = [&](int a, int b, double k) {
    add(a, a, k), add(a, b, -k);
    add(b, b, k), add(b, a, -k);
  };
  for (int j = 0; j + 1 < n; ++j)
    pair(j, j + 1, shell_d2(c.potential, 1, 1.0 + (u[j + 1] - u[j]) / eps));
  // each half of a split bond stiffens its gap by 2 U2''
  auto half = [&](int a) {
    double d2 = shell_d2(c.potential, 2, 2.0 + 2.0 * (u[a + 1] - u[a]) / eps);
    pair(a, a + 1, 2.0 * d2);
  };
  for (int j = 0; j + 2 < n; ++j) {
    if (ctx.bond_atomistic(j))
      pair(j, j + 2, shell_d2(c.potential, 2, 2.0 + (u[j + 2] - u[j]) / eps));
    else
      half(j), half(j + 1);
  }
  if (ctx.extrapolated) {
    if (ctx.mask[0]) {
      double ug = ghost_extrapolation(u[0], u[1], u[2]);
      double k = shell_d2(c.potential, 2, 2.0 + (u[1] - ug) / eps);
      add(1, 0, -3.0 * k), add(1, 1, 4.0 * k), add(1, 2, -k);
    } else {
      half(0);
    }
    if (ctx.mask[n - 1]) {
      double vg = ghost_extrapolation(u[n - 1], u[n - 2], u[n - 3]);
      double k = shell_d2(c.potential, 2, 2.0 + (vg - u[n - 2]) / eps);
      add(n - 2, n - 1, -3.0 * k), add(n - 2, n - 2, 4.0 * k),
          add(n - 2, n - 3, -k);
    } else {
      half(n - 2);
    }
  }
  for (int p : ctx.pinned) trip.emplace_back(p, p, 1.0);
  SpMat h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

Vec fb_residual(const Ctx& ctx, const Vec& u) {
  const Chain& c = ctx.chain;
  int n = c.n_atoms;
  double eps = c.epsilon;
  CauchyBorn cb = cauchy_born(c.potential);
  Vec r_atom = scaled_residual(c, u, custom_force(ctx.fext));
  Vec r = r_atom;
  for (int j = 0; j < n; ++j) {
    if (ctx.mask[j]) continue;
    double p_right = (j + 1 < n) ? cb.stress((u[j + 1] - u[j]) / eps) : 0.0;
    double p_left = (j > 0) ? cb.stress((u[j] - u[j - 1]) / eps) : 0.0;
    r[j] = eps * eps * ctx.fext[j] + eps * (p_right - p_left);
  }
  for (int p : ctx.pinned) r[p] = -u[p];
  return r;
}

SpMat fb_jacobian(const Ctx& ctx, const Vec& u) {
  const Chain& c = ctx.chain;
  int n = c.n_atoms;
  double eps = c.epsilon;
  CauchyBorn cb = cauchy_born(c.potential);
  SpMat h_atom = hessian(c, u);
  std::vector<Triplet> trip;
  trip.reserve(6 * n);
  std::vector<char> pinned(n, 0);
  for (int p : ctx.pinned) pinned[p] = 1;
  for (int k = 0; k < h_atom.outerSize(); ++k)
    for (SpMat::InnerIterator it(h_atom, k); it; ++it) {
      int row = static_cast<int>(it.row());
      if (ctx.mask[row] && !pinned[row])
        trip.emplace_back(row, static_cast<int>(it.col()), it.value());
    }
  for (int row = 0; row < n; ++row) {
    if (pinned[row]) {
      trip.emplace_back(row, row, 1.0);
      continue;
    }
    if (ctx.mask[row]) continue;
    double c_right = (row + 1 < n) ? cb.modulus((u[row + 1] - u[row]) / eps)
                                   : 0.0;
    double c_left = (row > 0) ? cb.modulus((u[row] - u[row - 1]) / eps) : 0.0;
    if (row > 0) trip.emplace_back(row, row - 1, -c_left);
    trip.emplace_back(row, row, c_left + c_right);
    if (row + 1 < n) trip.emplace_back(row, row + 1, -c_right);
  }
  SpMat h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

SolveReport run(const Model& m, const std::string& tag,
                const NewtonOptions& opts) {
  NewtonResult res = newton(m.scaled_residual, m.scaled_hessian,
                            Vec::Zero(m.n_atoms), opts);
  SolveReport rep;
  rep.u = res.u;
  rep.coeffs = res.u;
  rep.residual_norm = res.final_residual;
  rep.newton_iters = res.iterations;
  rep.method_tag = tag;
  return rep;
}

}  // namespace

Model qnl_model(const Chain& chain, const RegionPartition& part,
                const ExternalForce& f) {
  auto ctx = std::make_shared<Ctx>(make_ctx(chain, part, f));
  Model m;
  m.n_atoms = chain.n_atoms;
  m.epsilon = chain.epsilon;
  m.pinned = ctx->pinned;
  m.scaled_residual = [ctx](const Vec& u) { return qnl_residual(*ctx, u); };
  m.scaled_hessian = [ctx](const Vec& u) { return qnl_hessian(*ctx, u); };
  return m;
}

SolveReport solve_qnl(const Chain& chain, const RegionPartition& part,
                      const ExternalForce& f, const NewtonOptions& opts) {
  return run(qnl_model(chain, part, f), "qnl", opts);
}

Model force_based_model(const Chain& chain, const RegionPartition& part,
                        const ExternalForce& f) {
  auto ctx = std::make_shared<Ctx>(make_ctx(chain, part, f));
  Model m;
  m.n_atoms = chain.n_atoms;
  m.epsilon = chain.epsilon;
  m.pinned = ctx->pinned;
  m.scaled_residual = [ctx](const Vec& u) { return fb_residual(*ctx, u); };
  m.scaled_hessian = [ctx](const Vec& u) { return fb_jacobian(*ctx, u); };
  return m;
}

SolveReport solve_force_based(const Chain& chain, const RegionPartition& part,
                              const ExternalForce& f,
                              const NewtonOptions& opts) {
  return run(force_based_model(chain, part, f), "force_based", opts);
}

}  // namespace acc
