#include "acc/chain.hpp"

#include <cmath>

#include "acc/solvers.hpp"

namespace acc {

Vec ExternalForce::sample(const Chain& c) const {
  Vec f = Vec::Zero(c.n_atoms);
  switch (kind) {
    case ForceKind::Zero:
      break;
    case ForceKind::PointForce:
      if (atom < 0 || atom >= c.n_atoms)
        throw std::invalid_argument("point force atom out of range");
      f[atom] = magnitude;
      break;
    case ForceKind::HalfSine:
      for (int j = 0; j < c.n_atoms; ++j) {
        double x = c.x(j);
        if (x > 0.5) f[j] = std::sin(M_PI * x);
      }
      break;
    case ForceKind::FullSine:
      for (int j = 0; j < c.n_atoms; ++j) f[j] = std::sin(M_PI * c.x(j));
      break;
    case ForceKind::Custom:
      if (custom.size() != c.n_atoms)
        throw DimensionMismatch("custom force length != atom count");
      f = custom;
      break;
  }
  return f;
}

std::vector<int> pinned_atoms(const Chain& c) {
  int n = c.n_atoms;
  switch (c.boundary.kind) {
    case BoundaryKind::DirichletPinned:
    case BoundaryKind::DirichletExtrapolated:
      return {0, n - 1};
    case BoundaryKind::Traction:
      // right-end truncation of the semi-infinite chain
      return {n - 2, n - 1};
  }
  return {};
}

double total_energy(const Chain& c, const Vec& u, const ExternalForce& fext) {
  if (u.size() != c.n_atoms) throw DimensionMismatch("displacement length");
  int n = c.n_atoms;
  double e = 0.0;
  for (int j = 0; j + 1 < n; ++j)
    e += shell_energy(c.potential, 1, 1.0 + (u[j + 1] - u[j]) / c.epsilon);
  for (int j = 0; j + 2 < n; ++j)
    e += shell_energy(c.potential, 2, 2.0 + (u[j + 2] - u[j]) / c.epsilon);
  Vec f = fext.sample(c);
  e -= f.dot(u);
  return e;
}

Vec force(const Chain& c, const Vec& u, const ExternalForce& fext) {
  if (u.size() != c.n_atoms) throw DimensionMismatch("displacement length");
  int n = c.n_atoms;
  double eps = c.epsilon;
  Vec f = fext.sample(c);
  for (int j = 0; j + 1 < n; ++j) {
    double d1 = shell_d1(c.potential, 1, 1.0 + (u[j + 1] - u[j]) / eps);
    f[j] += d1 / eps;
    f[j + 1] -= d1 / eps;
  }
  for (int j = 0; j + 2 < n; ++j) {
    double d1 = shell_d1(c.potential, 2, 2.0 + (u[j + 2] - u[j]) / eps);
    f[j] += d1 / eps;
    f[j + 2] -= d1 / eps;
  }
  if (c.boundary.kind == BoundaryKind::DirichletExtrapolated) {
    // Ghost bonds (-1,1) and (N-2,N); the ghost displacement is substituted
    // into the equilibrium rows of the second and second-to-last atoms.
    double ug = ghost_extrapolation(u[0], u[1], u[2]);
    f[1] -= shell_d1(c.potential, 2, 2.0 + (u[1] - ug) / eps) / eps;
    double vg = ghost_extrapolation(u[n - 1], u[n - 2], u[n - 3]);
    f[n - 2] += shell_d1(c.potential, 2, 2.0 + (vg - u[n - 2]) / eps) / eps;
  }
  for (int p : pinned_atoms(c)) f[p] = -u[p];
  return f;
}

SpMat hessian(const Chain& c, const Vec& u) {
  if (u.size() != c.n_atoms) throw DimensionMismatch("displacement length");
  int n = c.n_atoms;
  double eps = c.epsilon;
  std::vector<char> pinned(n, 0);
  for (int p : pinned_atoms(c)) pinned[p] = 1;

  std::vector<Triplet> trip;
  trip.reserve(6 * n);
  auto add = [&](int row, int col, double v) {
    if (!pinned[row]) trip.emplace_back(row, col, v);
  };
  for (int j = 0; j + 1 < n; ++j) {
    double k = shell_d2(c.potential, 1, 1.0 + (u[j + 1] - u[j]) / eps);
    add(j, j, k), add(j, j + 1, -k);
    add(j + 1, j + 1, k), add(j + 1, j, -k);
  }
  for (int j = 0; j + 2 < n; ++j) {
    double k = shell_d2(c.potential, 2, 2.0 + (u[j + 2] - u[j]) / eps);
    add(j, j, k), add(j, j + 2, -k);
    add(j + 2, j + 2, k), add(j + 2, j, -k);
  }
  if (c.boundary.kind == BoundaryKind::DirichletExtrapolated) {
    double ug = ghost_extrapolation(u[0], u[1], u[2]);
    double k = shell_d2(c.potential, 2, 2.0 + (u[1] - ug) / eps);
    // d(u1 - ug)/d(u0,u1,u2) = (-3, 4, -1)
    add(1, 0, -3.0 * k), add(1, 1, 4.0 * k), add(1, 2, -k);
    double vg = ghost_extrapolation(u[n - 1], u[n - 2], u[n - 3]);
    double k2 = shell_d2(c.potential, 2, 2.0 + (vg - u[n - 2]) / eps);
    add(n - 2, n - 1, -3.0 * k2), add(n - 2, n - 2, 4.0 * k2),
        add(n - 2, n - 3, -k2);
  }
  for (int p = 0; p < n; ++p)
    if (pinned[p]) trip.emplace_back(p, p, 1.0);

  SpMat h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

Vec scaled_residual(const Chain& c, const Vec& u, const ExternalForce& fext) {
  Vec r = force(c, u, fext);
  double e2 = c.epsilon * c.epsilon;
  std::vector<char> pinned(c.n_atoms, 0);
  for (int p : pinned_atoms(c)) pinned[p] = 1;
  for (int j = 0; j < c.n_atoms; ++j)
    if (!pinned[j]) r[j] *= e2;
  return r;
}

SolveReport solve_atomistic(const Chain& c, const ExternalForce& fext) {
  auto res = [&](const Vec& u) { return scaled_residual(c, u, fext); };
  auto jac = [&](const Vec& u) { return hessian(c, u); };
  NewtonOptions opts;
  opts.max_iters = std::holds_alternative<Harmonic>(c.potential) ? 3 : 50;
  NewtonResult nr = newton(res, jac, Vec::Zero(c.n_atoms), opts);
  SolveReport rep;
  rep.u = nr.u;
  rep.coeffs = nr.u;
  rep.residual_norm = nr.final_residual;
  rep.newton_iters = nr.iterations;
  rep.method_tag = "atomistic";
  return rep;
}

}  // namespace acc
