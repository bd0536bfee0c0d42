#pragma once

#include <optional>
#include <string>

#include "acc/cgspace.hpp"
#include "acc/model.hpp"

namespace acc {

/// A0 = Phi A Phi^T.
SpMat assemble_a0(const CGMap& cg, const SpMat& a);

/// The exact Schur correction A1 = Phi A Psi^T (Psi A Psi^T)^{-1} Psi A Phi^T
/// through an explicit orthonormal complement basis. Reference-quality dense
/// path, capped at `cap` atoms.
Mat exact_a1_oracle(const CGMap& cg, const SpMat& a, int cap = 4096);

/// Effective coarse model data for the linear case.
struct EffectiveSystem {
  SpMat a0;
  std::optional<Mat> a1;  ///< oracle mode only
  Vec rhs;                ///< Phi f (eps^2-scaled)
};

/// Galerkin solve on the coarse space X0 = Range(Phi^T), optionally enriched
/// with extra basis vectors (columns of `enrich`, fine-scale, held fixed
/// across Newton iterations). Custom coarse assembly hooks support the
/// quadrature path.
struct CoarseAssembly {
  /// extra coarse residual terms, added to Phi * scaled_residual(u)
  std::function<void(const Vec& coeffs, const Vec& u, Vec& rho)> residual_extra;
  /// replaces the fine Hessian used in the projected Jacobian
  std::function<SpMat(const Vec& u)> hessian_override;
  /// extra coarse Jacobian blocks (top-left n x n only)
  std::function<void(const Vec& coeffs, const Vec& u, SpMat& j00)>
      jacobian_extra;
};

SolveReport solve_projected(const Model& model, const CGMap& cg,
                            const Mat* enrich, const std::string& tag,
                            const NewtonOptions& opts = {},
                            const CoarseAssembly* assembly = nullptr);

/// Standard Galerkin method (no enrichment). Quadrature assembly is wired in
/// by the quadrature module; this entry point is exact summation.
SolveReport solve_standard_galerkin(const CGMap& cg, const Chain& chain,
                                    const ExternalForce& f,
                                    const NewtonOptions& opts = {});

}  // namespace acc
