#include "acc/solvers.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace acc {

Vec direct_solve(const Mat& a, const Vec& b, Symmetry sym) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw DimensionMismatch("direct_solve: shape mismatch");
  if (sym == Symmetry::Spd) {
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success)
      throw SingularSystem("direct_solve: Cholesky failed (not SPD)");
    return llt.solve(b);
  }
  if (sym == Symmetry::Symmetric) {
    Eigen::LDLT<Mat> ldlt(a);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().cwiseAbs().minCoeff() <
            1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff())
      throw SingularSystem("direct_solve: LDLT pivot below tolerance");
    return ldlt.solve(b);
  }
  Eigen::PartialPivLU<Mat> lu(a);
  double dmin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  double dmax = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
  if (!(dmax > 0) || dmin < 1e-14 * dmax)
    throw SingularSystem("direct_solve: LU pivot below tolerance");
  return lu.solve(b);
}

Vec direct_solve(const SpMat& a, const Vec& b, Symmetry sym) {
  SparseFactor f(a, sym);
  return f.solve(b);
}

SparseFactor::SparseFactor(const SpMat& a, Symmetry sym) : sym_(sym) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("SparseFactor: matrix not square");
  if (sym == Symmetry::Spd || sym == Symmetry::Symmetric) {
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success)
      throw SingularSystem("SparseFactor: LDLT factorization failed");
  } else {
    lu_.compute(a);
    if (lu_.info() != Eigen::Success)
      throw SingularSystem("SparseFactor: LU factorization failed");
  }
}

Vec SparseFactor::solve(const Vec& b) const {
  return (sym_ == Symmetry::General) ? Vec(lu_.solve(b)) : Vec(ldlt_.solve(b));
}

Mat SparseFactor::solve(const Mat& b) const {
  return (sym_ == Symmetry::General) ? Mat(lu_.solve(b)) : Mat(ldlt_.solve(b));
}

NewtonResult newton(const std::function<Vec(const Vec&)>& residual,
                    const std::function<SpMat(const Vec&)>& jacobian, Vec u0,
                    const NewtonOptions& opts) {
  Vec u = std::move(u0);
  Vec r = residual(u);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opts.max_iters; ++it) {
    if (rnorm <= opts.tol) return {u, it, rnorm};
    SpMat j = jacobian(u);
    Vec step = direct_solve(j, r, Symmetry::General);
    if (!step.allFinite())
      throw SingularSystem("newton: non-finite step (singular Jacobian)");
    double lambda = 1.0;
    Vec u_next = u + step;
    Vec r_next = residual(u_next);
    double rn_next = r_next.lpNorm<Eigen::Infinity>();
    if (opts.step_halving) {
      int halvings = 0;
      while (!(rn_next < rnorm) && halvings < 30) {
        lambda *= 0.5;
        u_next = u + lambda * step;
        r_next = residual(u_next);
        rn_next = r_next.lpNorm<Eigen::Infinity>();
        ++halvings;
      }
    }
    u = std::move(u_next);
    r = std::move(r_next);
    rnorm = rn_next;
  }
  if (rnorm <= opts.tol) return {u, opts.max_iters, rnorm};
  throw NonConvergence("newton: residual " + std::to_string(rnorm) +
                       " after max iterations");
}

void replace_rows_identity(SpMat& a, const std::vector<int>& rows) {
  std::vector<char> mark(a.rows(), 0);
  for (int r : rows) mark[r] = 1;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      if (mark[it.row()])
        it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
  for (int r : rows)
    a.coeffRef(r, r) = 1.0;  // creates the diagonal if it was absent
  a.makeCompressed();
}

void bordered_solve(const SparseFactor& a_fact, const SpMat& a, const Mat& b,
                    const Mat& c, const Mat& d, const Vec& b1, const Vec& b2,
                    Vec& x, Vec& y) {
  (void)a;
  Mat ainv_b = a_fact.solve(b);
  Vec ainv_b1 = a_fact.solve(b1);
  Mat schur = d - c * ainv_b;
  y = direct_solve(schur, Vec(b2 - c * ainv_b1), Symmetry::General);
  x = ainv_b1 - ainv_b * y;
}

}  // namespace acc
