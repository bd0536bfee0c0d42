#include "acc/enrichment.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "acc/reduction.hpp"

namespace acc {

Mat KrylovBasis::assemble_t() const {
  int n = k();
  Mat t = Mat::Zero(n, n);
  int off = 0;
  for (size_t j = 0; j < t_diag.size(); ++j) {
    int p = block_sizes[j];
    t.block(off, off, p, p) = t_diag[j];
    if (j + 1 < t_diag.size()) {
      int p_next = block_sizes[j + 1];
      // B_j maps block j to block j+1: Z_j = V_{j+1} B_j
      t.block(off + p, off, p_next, p) = t_offdiag[j];
      t.block(off, off + p, p, p_next) = t_offdiag[j].transpose();
    }
    off += p;
  }
  return t;
}

namespace {

// Rank-revealing QR: thin Q (rank columns) and the permuted triangular
// factor R P^T truncated to the numerical rank.
struct RrqrResult {
  Mat q;
  Mat r;
  int rank = 0;
  double r0 = 0.0;  ///< largest R diagonal before truncation
};

RrqrResult rrqr(const Mat& z, double tol, double abs_floor = 0.0) {
  Eigen::ColPivHouseholderQR<Mat> qr(z);
  int pmax = static_cast<int>(std::min(z.rows(), z.cols()));
  Mat rfull = qr.matrixR()
                  .topLeftCorner(pmax, z.cols())
                  .template triangularView<Eigen::Upper>();
  double r0 = (pmax > 0) ? std::abs(rfull(0, 0)) : 0.0;
  double thresh = std::max(tol * r0, abs_floor);
  int rank = 0;
  for (int i = 0; i < pmax; ++i)
    if (std::abs(rfull(i, i)) > thresh) ++rank;
  RrqrResult out;
  out.rank = rank;
  out.r0 = r0;
  if (rank == 0) return out;
  out.q = qr.householderQ() * Mat::Identity(z.rows(), rank);
  out.r = rfull.topRows(rank) * qr.colsPermutation().inverse();
  return out;
}

}  // namespace

KrylovBasis block_lanczos(const MatOp& apply_a, const MatOp& apply_q,
                          const Mat& seed, int ell, double deflation_tol) {
  if (seed.cols() == 0 || seed.norm() == 0.0)
    throw SolverError("block_lanczos: empty or zero seed");
  const Eigen::Index n = seed.rows();
  KrylovBasis kb;
  Mat z = seed;
  Mat v_prev;      // V_{j-1}
  int levels = ell + 1;
  double scale = 0.0;  // seed panel magnitude: anchors deflation at exhaustion
  for (int j = 0; j < levels; ++j) {
    // re-project every panel: rounding lets components of Range(P) creep in
    // and they would be amplified by the next operator application
    z = apply_q(z);
    // the projection's own rounding noise lies along the accepted panels;
    // once z is small (near exhaustion) that noise would be normalized up
    // into a spurious direction, so strip it before the rank decision
    if (kb.vectors.cols())
      for (int sweep = 0; sweep < 2; ++sweep)
        z -= kb.vectors * (kb.vectors.transpose() * z);
    RrqrResult f = rrqr(z, deflation_tol, deflation_tol * scale);
    if (j == 0) scale = f.r0;
    if (f.rank == 0) {
      if (j == 0) throw SolverError("block_lanczos: seed rank is zero");
      break;  // Krylov space exhausted early; truncated basis is valid
    }
    Mat v = f.q;
    if (j == 0)
      kb.seed_r.push_back(f.r);
    else
      kb.t_offdiag.push_back(f.r);
    // operator application with complement re-projection
    Mat y = apply_q(apply_a(v));
    Mat a_j = v.transpose() * y;
    kb.t_diag.push_back(0.5 * (a_j + a_j.transpose()));
    kb.block_sizes.push_back(f.rank);

    Mat z_next = y - v * a_j;
    if (v_prev.size()) z_next -= v_prev * f.r.transpose();
    // append the block, then fully re-orthogonalize the residual against
    // everything produced so far (classic Lanczos loses orthogonality)
    Eigen::Index old = kb.vectors.cols();
    Mat grown(n, old + f.rank);
    if (old) grown.leftCols(old) = kb.vectors;
    grown.rightCols(f.rank) = v;
    kb.vectors = std::move(grown);
    for (int sweep = 0; sweep < 2; ++sweep)
      z_next -= kb.vectors * (kb.vectors.transpose() * z_next);

    v_prev = v;
    z = std::move(z_next);
  }
  return kb;
}

std::vector<int> select_seed_dofs(const CGMap& cg,
                                  const EnrichmentConfig& cfg) {
  std::vector<int> dofs;
  if (cfg.seeds_all_continuum) {
    // wide-support rule: hat bases across the whole continuum region
    for (int i = 0; i < cg.n; ++i) {
      int a = cg.dof_atom[i];
      int left = (i > 0) ? cg.dof_atom[i - 1] : a;
      int right = (i + 1 < cg.n) ? cg.dof_atom[i + 1] : a;
      if (right - left > 2) dofs.push_back(i);
      if (static_cast<int>(dofs.size()) == cfg.m) break;
    }
    return dofs;
  }
  if (cg.interface_atoms.empty())
    throw InvalidPartition("seed selection needs an interface");
  std::vector<int> order(cg.n);
  std::iota(order.begin(), order.end(), 0);
  auto dist = [&](int dof) {
    int best = cg.n_atoms;
    for (int ia : cg.interface_atoms)
      best = std::min(best, std::abs(cg.dof_atom[dof] - ia));
    return best;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist(a) < dist(b); });
  int m = std::min(cfg.m, cg.n);
  dofs.assign(order.begin(), order.begin() + m);
  std::sort(dofs.begin(), dofs.end());
  return dofs;
}

Mat seed_matrix(const CGMap& cg, const SpMat& a,
                const std::vector<int>& dofs) {
  Mat phit = Mat::Zero(cg.n_atoms, static_cast<Eigen::Index>(dofs.size()));
  for (size_t c = 0; c < dofs.size(); ++c)
    phit.col(c) = Vec(cg.phi.row(dofs[c]).transpose());
  return cg.apply_q(Mat(a * phit));
}

KrylovBasis build_enrichment(const CGMap& cg, const SpMat& a,
                             const EnrichmentConfig& cfg) {
  auto dofs = select_seed_dofs(cg, cfg);
  Mat w = seed_matrix(cg, a, dofs);
  auto apply_a = [&](const Mat& x) { return Mat(a * x); };
  auto apply_q = [&](const Mat& x) { return cg.apply_q(x); };
  KrylovBasis kb = block_lanczos(apply_a, apply_q, w, cfg.ell,
                                 cfg.deflation_tol);
  kb.seed_dofs = dofs;
  return kb;
}

Mat extend_space(const CGMap& cg, const KrylovBasis& kb) {
  int k = kb.k();
  Mat vtv = kb.vectors.transpose() * kb.vectors;
  if ((vtv - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8)
    throw SolverError("extend_space: rank-deficient enrichment basis");
  Mat x(cg.n + k, cg.n_atoms);
  x.topRows(cg.n) = Mat(cg.phi);
  x.bottomRows(k) = kb.vectors.transpose();
  return x;
}

SolveReport solve_enriched(const CGMap& cg, const KrylovBasis& kb,
                           const Chain& chain, const ExternalForce& f,
                           const NewtonOptions& opts) {
  Model m = chain_model(chain, f);
  return solve_projected(m, cg, &kb.vectors, "enriched", opts);
}

Mat approx_a1(const CGMap& cg, const KrylovBasis& kb) {
  int k = kb.k();
  Mat a1 = Mat::Zero(cg.n, cg.n);
  if (k == 0 || kb.seed_dofs.empty()) return a1;
  int m = static_cast<int>(kb.seed_dofs.size());
  Mat e1 = Mat::Zero(k, m);
  e1.topRows(kb.seed_r[0].rows()) = kb.seed_r[0];
  Mat t = kb.assemble_t();
  // at deep recursion the deflated tail leaves T with numerically void
  // directions; drop them rather than fail the whole correction
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(t);
  cod.setThreshold(1e-12);
  if (cod.rank() == 0)
    throw SingularSystem("approx_a1: singular block-tridiagonal T");
  Mat core = e1.transpose() * cod.solve(e1);  // m x m
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      a1(kb.seed_dofs[i], kb.seed_dofs[j]) = core(i, j);
  return a1;
}

}  // namespace acc
