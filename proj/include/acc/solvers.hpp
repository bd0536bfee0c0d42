#pragma once

#include <functional>

#include "acc/types.hpp"

namespace acc {

enum class Symmetry { Spd, Symmetric, General };

/// Direct factorization solve with a zero-pivot / rank check.
/// Throws SingularSystem instead of returning garbage.
Vec direct_solve(const Mat& a, const Vec& b, Symmetry sym = Symmetry::General);
Vec direct_solve(const SpMat& a, const Vec& b, Symmetry sym = Symmetry::General);

/// Reusable factorization of a sparse matrix (LDLT when symmetric, LU else).
class SparseFactor {
 public:
  SparseFactor(const SpMat& a, Symmetry sym);
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;

 private:
  Symmetry sym_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::SparseLU<SpMat> lu_;
};

struct NewtonOptions {
  double tol = 1e-12;   ///< max-norm residual target
  int max_iters = 50;
  bool step_halving = false;
};

struct NewtonResult {
  Vec u;
  int iterations = 0;
  double final_residual = 0;
};

/// Newton's method on residual(u) = 0 with jacobian(u) * step = residual(u).
/// The caller's jacobian must be consistent with the residual's sign
/// convention (step is added to u).
NewtonResult newton(const std::function<Vec(const Vec&)>& residual,
                    const std::function<SpMat(const Vec&)>& jacobian,
                    Vec u0, const NewtonOptions& opts = {});

/// Replace the given rows of a (column-major) sparse matrix by identity rows.
void replace_rows_identity(SpMat& a, const std::vector<int>& rows);

/// Solve the bordered system [[A, B], [C, D]] [x; y] = [b1; b2] by block
/// elimination through a sparse factorization of A and a dense Schur
/// complement in the border.
void bordered_solve(const SparseFactor& a_fact, const SpMat& a, const Mat& b,
                    const Mat& c, const Mat& d, const Vec& b1, const Vec& b2,
                    Vec& x, Vec& y);

}  // namespace acc
