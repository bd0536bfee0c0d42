#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace acc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : SolverError {
  using SolverError::SolverError;
};

struct SingularSystem : SolverError {
  using SolverError::SolverError;
};

struct InvalidPartition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Result of any equilibrium solve (atomistic, Galerkin, enriched, QC).
struct SolveReport {
  Vec u;                    ///< reconstructed per-atom displacement
  Vec coeffs;               ///< coefficients in the solve's own basis
  double residual_norm = 0; ///< max norm of the projected force balance
  int newton_iters = 0;     ///< 0 for purely linear solves
  std::string method_tag;
};

}  // namespace acc
