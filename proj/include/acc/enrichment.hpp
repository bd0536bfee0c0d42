#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acc/cgspace.hpp"
#include "acc/model.hpp"
#include "acc/types.hpp"

namespace acc {

struct EnrichmentConfig {
  int m = 6;       ///< seed basis functions around the interface
  int ell = 5;     ///< Krylov depth
  double deflation_tol = 1e-10;   ///< rank-revealing QR threshold (relative)
  bool seeds_all_continuum = false;  ///< wide-support rule for nonlocal loads
};

/// Orthonormal block-Lanczos vectors with the block-tridiagonal projection.
struct KrylovBasis {
  Mat vectors;                 ///< N x k, orthonormal, in Range(Q)
  std::vector<Mat> t_diag;     ///< A_j, j = 1..L
  std::vector<Mat> t_offdiag;  ///< B_j coupling blocks j and j+1, j = 1..L-1
  std::vector<Mat> seed_r;     ///< B_0: the seed's triangular QR factor
  std::vector<int> block_sizes;
  std::vector<int> seed_dofs;  ///< coarse dofs whose bases seeded W~

  int k() const { return static_cast<int>(vectors.cols()); }
  /// T assembled from the stored blocks (k x k, symmetric block-tridiagonal).
  Mat assemble_t() const;
};

using MatOp = std::function<Mat(const Mat&)>;

/// Block Lanczos with rank-revealing QR deflation and full
/// re-orthogonalization, run on the operator QA. Produces the orthonormal
/// basis of span{W, QA W, ..., (QA)^ell W}. Each new block is re-projected by
/// Q to suppress drift out of the complement space. Throws SolverError if the
/// seed has rank zero.
KrylovBasis block_lanczos(const MatOp& apply_a, const MatOp& apply_q,
                          const Mat& seed, int ell,
                          double deflation_tol = 1e-10);

/// The m coarse bases nearest an atomistic/continuum interface, split as
/// evenly as possible between the two sides.
std::vector<int> select_seed_dofs(const CGMap& cg, const EnrichmentConfig& cfg);

/// W~ = Q A Phi~^T for the selected coarse bases.
Mat seed_matrix(const CGMap& cg, const SpMat& a, const std::vector<int>& dofs);

/// Full pipeline: seeds, W~, Lanczos on QA.
KrylovBasis build_enrichment(const CGMap& cg, const SpMat& a,
                             const EnrichmentConfig& cfg);

/// Stacked operator of the extended space X = X0 + K_ell (rows of Phi plus
/// the transposed Krylov vectors). Throws SolverError on a rank-deficient
/// basis (deflation tolerance too loose).
Mat extend_space(const CGMap& cg, const KrylovBasis& kb);

/// Galerkin solve on the extended space; enriched bases held fixed across
/// Newton iterations.
SolveReport solve_enriched(const CGMap& cg, const KrylovBasis& kb,
                           const Chain& chain, const ExternalForce& f,
                           const NewtonOptions& opts = {});

/// Low-rank diagnostic correction A1 ~ E1^T T^{-1} E1, scattered onto the
/// seed dofs of an n x n matrix. Throws SingularSystem if T is singular.
Mat approx_a1(const CGMap& cg, const KrylovBasis& kb);

}  // namespace acc
