#pragma once

#include <vector>

#include "acc/potential.hpp"
#include "acc/types.hpp"

namespace acc {

enum class BoundaryKind {
  DirichletPinned,        ///< u_first = u_last = 0, pair terms truncated
  DirichletExtrapolated,  ///< ghost atoms via one-sided extrapolation
  Traction,               ///< crack model only: end loads, right end pinned
};

struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::DirichletPinned;
  double load = 0.0;  ///< traction magnitude P (Traction only)
};

/// 1D atomistic chain over the unit interval, up to second-neighbor bonds.
/// Atom j (0-based) sits at x_j = (j+1)*epsilon with epsilon = 1/N.
struct Chain {
  int n_atoms = 0;
  double epsilon = 0.0;
  Potential potential = Harmonic{};
  BoundarySpec boundary;

  double x(int j) const { return (j + 1) * epsilon; }
};

inline Chain make_chain(int n_atoms, Potential pot = Harmonic{},
                        BoundarySpec bc = {}) {
  if (n_atoms < 8) throw std::invalid_argument("chain needs at least 8 atoms");
  return Chain{n_atoms, 1.0 / n_atoms, pot, bc};
}

enum class ForceKind { Zero, PointForce, HalfSine, FullSine, Custom };

struct ExternalForce {
  ForceKind kind = ForceKind::Zero;
  int atom = 0;          ///< PointForce: 0-based atom index
  double magnitude = 0;  ///< PointForce
  Vec custom;

  /// Per-atom force values on a given chain.
  Vec sample(const Chain& c) const;
};

inline ExternalForce zero_force() { return {}; }
inline ExternalForce point_force(int atom, double magnitude = 1.0) {
  return ExternalForce{ForceKind::PointForce, atom, magnitude, {}};
}
inline ExternalForce half_sine() { return ExternalForce{ForceKind::HalfSine}; }
inline ExternalForce full_sine() { return ExternalForce{ForceKind::FullSine}; }
inline ExternalForce custom_force(Vec v) {
  return ExternalForce{ForceKind::Custom, 0, 0, std::move(v)};
}

/// One-sided ghost extrapolation from the first three interior displacements.
/// Exact on quadratic sequences.
inline double ghost_extrapolation(double u1, double u2, double u3) {
  return 3.0 * u1 - 3.0 * u2 + u3;
}

/// Total energy V(u) = sum of pair terms - f.u. Pair terms are truncated at
/// the chain ends; ghost bonds are a residual-level device and do not enter.
double total_energy(const Chain& c, const Vec& u, const ExternalForce& f);

/// Per-atom force f - grad(pair energy). Rows at pinned atoms return -u_j;
/// under DirichletExtrapolated the rows next to the ends use the ghost-atom
/// substitution.
Vec force(const Chain& c, const Vec& u, const ExternalForce& f);

/// eps^2-scaled force-constant matrix with boundary rows applied: interior
/// harmonic stencil is [-K1, -K0, 2K0+2K1, -K0, -K1]; pinned rows are
/// identity; extrapolated rows carry the ghost substitution (nonsymmetric).
SpMat hessian(const Chain& c, const Vec& u);

/// eps^2-scaled force on interior rows, -u_j on pinned rows; pairs with
/// hessian() as a Newton residual/Jacobian.
Vec scaled_residual(const Chain& c, const Vec& u, const ExternalForce& f);

/// Exact reference solve: direct for Harmonic, Newton for LennardJones.
SolveReport solve_atomistic(const Chain& c, const ExternalForce& f);

/// Atoms pinned by the boundary condition (first/last, or last two under
/// Traction).
std::vector<int> pinned_atoms(const Chain& c);

}  // namespace acc
