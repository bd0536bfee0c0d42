#include "acc/reduction.hpp"

#include <Eigen/QR>

namespace acc {

SpMat assemble_a0(const CGMap& cg, const SpMat& a) {
  if (a.rows() != cg.n_atoms)
    throw DimensionMismatch("assemble_a0: hessian size != atom count");
  return SpMat(cg.phi * SpMat(a * SpMat(cg.phi.transpose())));
}

Mat exact_a1_oracle(const CGMap& cg, const SpMat& a, int cap) {
  if (cg.n_atoms > cap)
    throw std::invalid_argument("exact_a1_oracle: oracle cap exceeded");
  int n = cg.n, big = cg.n_atoms;
  // orthonormal basis of Range(Phi^T)^perp from a full Householder QR
  Mat phit = Mat(cg.phi.transpose());
  Eigen::HouseholderQR<Mat> qr(phit);
  Mat qfull = qr.householderQ();
  Mat psit = qfull.rightCols(big - n);  // N x (N-n)
  Mat ad(a);
  Mat a_psit = ad * psit;
  Mat psi_a_psit = psit.transpose() * a_psit;
  Mat phi_a_psit = Mat(cg.phi * a_psit);  // n x (N-n)
  Eigen::LDLT<Mat> ldlt(psi_a_psit);
  if (ldlt.info() != Eigen::Success)
    throw SingularSystem("exact_a1_oracle: Psi A Psi^T not factorizable");
  return phi_a_psit * ldlt.solve(phi_a_psit.transpose());
}

SolveReport solve_projected(const Model& model, const CGMap& cg,
                            const Mat* enrich, const std::string& tag,
                            const NewtonOptions& opts,
                            const CoarseAssembly* assembly) {
  int n = cg.n;
  int k = enrich ? static_cast<int>(enrich->cols()) : 0;
  std::vector<int> pinned_dofs;
  for (int p : model.pinned) {
    int d = cg.dof_of_atom(p);
    if (d < 0)
      throw InvalidPartition("pinned atom is not a coarse variable");
    pinned_dofs.push_back(d);
  }

  auto reconstruct = [&](const Vec& c) {
    Vec u = cg.phi.transpose() * c.head(n);
    if (k) u += (*enrich) * c.tail(k);
    return u;
  };

  auto coarse_residual = [&](const Vec& c) {
    Vec u = reconstruct(c);
    Vec r = model.scaled_residual(u);
    Vec rho(n + k);
    rho.head(n) = cg.phi * r;
    if (k) rho.tail(k) = enrich->transpose() * r;
    if (assembly && assembly->residual_extra)
      assembly->residual_extra(c, u, rho);
    for (int d : pinned_dofs) rho[d] = -c[d];
    return rho;
  };

  // Jacobian applied through a bordered solve: sparse coarse block plus dense
  // enrichment borders.
  auto newton_step = [&](const Vec& c, const Vec& rho) {
    Vec u = reconstruct(c);
    SpMat h = (assembly && assembly->hessian_override)
                  ? assembly->hessian_override(u)
                  : model.scaled_hessian(u);
    SpMat j00 = SpMat(cg.phi * SpMat(h * SpMat(cg.phi.transpose())));
    if (assembly && assembly->jacobian_extra)
      assembly->jacobian_extra(c, u, j00);
    // pinned coarse rows -> identity
    replace_rows_identity(j00, pinned_dofs);
    Vec step(n + k);
    if (k == 0) {
      step = direct_solve(j00, Vec(rho.head(n)), Symmetry::General);
    } else {
      // border rows carry the exact residual, so they need the exact
      // operator even when the coarse block is assembled by quadrature
      SpMat hb = (assembly && assembly->hessian_override)
                     ? model.scaled_hessian(u)
                     : h;
      Mat hv = hb * (*enrich);
      Mat b = Mat(cg.phi * hv);  // n x k
      // V^T H Phi^T = (Phi H^T V)^T
      Mat cmat = Mat(cg.phi * Mat(hb.transpose() * (*enrich))).transpose();
      Mat d = enrich->transpose() * hv;  // k x k
      for (int dd : pinned_dofs) b.row(dd).setZero();
      SparseFactor fac(j00, Symmetry::General);
      Vec x, y;
      bordered_solve(fac, j00, b, cmat, d, rho.head(n), rho.tail(k), x, y);
      step.head(n) = x;
      step.tail(k) = y;
    }
    return step;
  };

  Vec c = Vec::Zero(n + k);
  Vec rho = coarse_residual(c);
  double rnorm = rho.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < opts.max_iters && rnorm > opts.tol; ++it) {
    Vec step = newton_step(c, rho);
    if (!step.allFinite())
      throw SingularSystem("solve_projected: non-finite Newton step");
    c += step;
    rho = coarse_residual(c);
    rnorm = rho.lpNorm<Eigen::Infinity>();
  }
  if (rnorm > opts.tol)
    throw NonConvergence("solve_projected(" + tag + "): residual " +
                         std::to_string(rnorm));

  SolveReport rep;
  rep.u = reconstruct(c);
  rep.coeffs = c;
  rep.residual_norm = rnorm;
  rep.newton_iters = it;
  rep.method_tag = tag;
  return rep;
}

SolveReport solve_standard_galerkin(const CGMap& cg, const Chain& chain,
                                    const ExternalForce& f,
                                    const NewtonOptions& opts) {
  Model m = chain_model(chain, f);
  return solve_projected(m, cg, nullptr, "galerkin", opts);
}

}  // namespace acc
