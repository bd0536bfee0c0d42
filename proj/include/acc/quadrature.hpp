#pragma once

#include <memory>
#include <vector>

#include "acc/cgspace.hpp"
#include "acc/enrichment.hpp"
#include "acc/reduction.hpp"

namespace acc {

/// Cauchy-Born constitutive functions per unit cell at displacement
/// gradient F: energy W, stress P = W', modulus C = W''.
struct CauchyBorn {
  Potential pot;
  double energy(double f) const {
    return shell_energy(pot, 1, 1.0 + f) + shell_energy(pot, 2, 2.0 + 2.0 * f);
  }
  double stress(double f) const {
    return shell_d1(pot, 1, 1.0 + f) + 2.0 * shell_d1(pot, 2, 2.0 + 2.0 * f);
  }
  double modulus(double f) const {
    return shell_d2(pot, 1, 1.0 + f) + 4.0 * shell_d2(pot, 2, 2.0 + 2.0 * f);
  }
};

inline CauchyBorn cauchy_born(const Potential& p) { return CauchyBorn{p}; }

/// A bond handed over (fully or half, at a node tie) to element-level
/// Cauchy-Born summation.
struct QuadBond {
  int atom = 0;      ///< left atom of the bond
  int shell = 1;
  double frac = 1.0; ///< share of the bond treated by quadrature
};

/// Effective bond counts of one quadrature element.
struct QuadElement {
  int element = 0;  ///< index into CGMap::elements
  double w1 = 0, w2 = 0;
};

/// Bond reassignment by midpoint: a bond belongs to the element containing
/// its midpoint; a midpoint on a shared node splits half/half. Only
/// quadrature-eligible elements participate; everything else stays exact.
struct QuadratureScheme {
  std::vector<QuadBond> bonds;
  std::vector<QuadElement> elems;
};

QuadratureScheme build_quadrature(const CGMap& cg);

/// Coarse assembly hooks replacing per-bond summation in the quadrature
/// elements by one-point Cauchy-Born evaluation, and the per-atom load sum by
/// a midpoint rule when the external force is smooth. The hooks reference
/// `cg`, which must outlive the returned object.
CoarseAssembly quadrature_assembly(const CGMap& cg, const Chain& chain,
                                   const ExternalForce& f,
                                   std::shared_ptr<const QuadratureScheme> qs);

SolveReport solve_galerkin_quadrature(const CGMap& cg, const Chain& chain,
                                      const ExternalForce& f,
                                      const NewtonOptions& opts = {});

SolveReport solve_enriched_quadrature(const CGMap& cg, const KrylovBasis& kb,
                                      const Chain& chain,
                                      const ExternalForce& f,
                                      const NewtonOptions& opts = {});

}  // namespace acc
