#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acc/cgspace.hpp"
#include "acc/enrichment.hpp"
#include "acc/model.hpp"

namespace acc {

struct BranchLost : SolverError {
  using SolverError::SolverError;
};

/// Half of the symmetric lattice fracture model: the upper chain under an
/// opening traction, with vertical bonds to the (mirrored) lower chain. The
/// first n_broken vertical bonds are cracked, bond n_broken is the breakable
/// tip bond gamma(u_tip), bonds beyond are intact quadratic springs.
struct CrackModel {
  Chain chain;        ///< Traction boundary, right end pinned
  double k2 = 0.5;    ///< vertical bond stiffness, > 0
  double u_cut = 0.5; ///< tip bond breaking displacement, > 0
  int n_broken = 514; ///< 1-based index of the tip bond, in [1, N)
  double load = 1.0;  ///< traction magnitude P
  /// keep the 1/eps inside gamma's integrand; the alternative drops it
  bool gamma_as_printed = true;
  /// split the end load over the first two atoms so a uniform strain is
  /// residual-free; false puts all of P on the first atom, which leaves a
  /// free-surface layer there
  bool load_consistent = true;

  int tip_atom() const { return n_broken - 1; }  ///< 0-based
};

/// Standard setup: opening load P, tip two atoms right of the midpoint.
CrackModel make_crack_model(int n_atoms = 1024, double load = 1.0,
                            Potential pot = Harmonic{4.0, 0.4},
                            int n_broken = -1);

/// Surface energy of the partially broken tip bond: quartic on [0, u_cut],
/// constant gamma0 beyond, zero for u <= 0. C^1 (in fact C^2) at u_cut.
double gamma_energy(const CrackModel& m, double u);
double gamma_d1(const CrackModel& m, double u);
double gamma_d2(const CrackModel& m, double u);
inline double gamma0(const CrackModel& m) { return gamma_energy(m, m.u_cut); }

/// Loads on the first two atoms producing a uniform displacement gradient
/// near the free end; full per-atom vector.
Vec traction_forces(const CrackModel& m);

/// Total energy including the broken-bond constant (n_broken - 1) gamma0.
double crack_energy(const CrackModel& m, const Vec& u);

/// Residual/Hessian pair in the shared scaled Newton convention.
Model crack_equations(const CrackModel& m);

enum class CrackMethod { Atomistic, Galerkin, Enriched, Qnl, ForceBased };

/// Equilibrium of the crack model. Galerkin/Enriched need `cg`; Qnl and
/// ForceBased use only its region partition. `u0` warm-starts the atomistic
/// and coupled full-resolution methods.
SolveReport solve_crack(const CrackModel& m, CrackMethod method,
                        const CGMap* cg = nullptr,
                        const EnrichmentConfig& enrich = {},
                        const NewtonOptions& opts = {},
                        const Vec* u0 = nullptr);

struct BifPoint {
  double load = 0;
  double u_first = 0;   ///< displacement of the first atom
  double u_tip = 0;     ///< displacement at the tip bond
  double min_eig = 0;   ///< smallest eigenvalue of the (projected) Hessian
  int n_neg = 0;        ///< negative eigenvalues of the free block
  bool stable = false;
  std::string branch;   ///< "lower" | "upper" | "middle"
};

struct BifurcationResult {
  std::vector<BifPoint> points;
  std::vector<double> folds;  ///< refined fold loads, ascending
  std::string method_tag;
};

/// Load-sweep continuation: upward along the intact branch and downward along
/// the broken branch with warm starts and step halving at the folds, then a
/// middle-branch pass seeded by interpolating the outer branches. With
/// load_hi <= load_lo the range is chosen automatically from the linear
/// response. Throws BranchLost when a branch cannot be seeded.
BifurcationResult bifurcation_sweep(const CrackModel& m, CrackMethod method,
                                    const CGMap* cg, double load_lo,
                                    double load_hi, int steps);

}  // namespace acc
