#include "acc/quadrature.hpp"

#include <cmath>
#include <map>

namespace acc {

QuadratureScheme build_quadrature(const CGMap& cg) {
  QuadratureScheme qs;
  // accumulate fractional shares per bond; a shell-2 bond sitting on a node
  // shared by two quadrature elements ends up with frac 1
  std::map<std::pair<int, int>, double> share;  // (shell, atom) -> frac
  for (size_t e = 0; e < cg.elements.size(); ++e) {
    const Element& el = cg.elements[e];
    if (!el.quadrature) continue;
    int l = el.left_atom, r = el.right_atom;
    QuadElement qe;
    qe.element = static_cast<int>(e);
    // shell-1 midpoints j + 1/2 are never on a node
    for (int j = l; j < r; ++j) share[{1, j}] += 1.0;
    qe.w1 = r - l;
    // shell-2 midpoints j + 1: interior bonds plus half of each node tie.
    // A tie is taken only when the neighbor element is itself eligible;
    // otherwise the whole bond stays exact and the half weight is dropped,
    // which is what keeps uniform strain residual-free at the block edges.
    for (int j = l; j <= r - 2; ++j) share[{2, j}] += 1.0;
    double w2 = r - l - 1;
    if (e > 0 && cg.elements[e - 1].quadrature) {
      share[{2, l - 1}] += 0.5;
      w2 += 0.5;
    }
    if (e + 1 < cg.elements.size() && cg.elements[e + 1].quadrature) {
      share[{2, r - 1}] += 0.5;
      w2 += 0.5;
    }
    qe.w2 = w2;
    qs.elems.push_back(qe);
  }
  for (const auto& [key, frac] : share)
    qs.bonds.push_back(QuadBond{key.second, key.first, frac});
  return qs;
}

namespace {

// exact per-atom load of the quadrature elements replaced by the midpoint
// rule; returns the coarse-space correction (midpoint minus exact)
Vec load_correction(const CGMap& cg, const Chain& chain,
                    const ExternalForce& f, const QuadratureScheme& qs) {
  Vec delta = Vec::Zero(cg.n);
  if (f.kind != ForceKind::HalfSine && f.kind != ForceKind::FullSine)
    return delta;
  auto fval = [&](double x) {
    if (f.kind == ForceKind::FullSine) return std::sin(M_PI * x);
    return (x > 0.5) ? std::sin(M_PI * x) : 0.0;
  };
  double eps = chain.epsilon;
  double eps2 = eps * eps;
  Vec fs = f.sample(chain);
  for (const QuadElement& qe : qs.elems) {
    const Element& el = cg.elements[qe.element];
    int l = el.left_atom, r = el.right_atom;
    double s = r - l;
    // atoms (l, r] belong to this element; hats are linear across it
    for (int j = l + 1; j <= r; ++j) {
      delta[el.left_dof] -= eps2 * fs[j] * (r - j) / s;
      delta[el.right_dof] -= eps2 * fs[j] * (j - l) / s;
    }
    double fm = fval(0.5 * (chain.x(l) + chain.x(r)));
    delta[el.left_dof] += 0.5 * s * eps2 * fm;
    delta[el.right_dof] += 0.5 * s * eps2 * fm;
  }
  return delta;
}

}  // namespace

CoarseAssembly quadrature_assembly(const CGMap& cg, const Chain& chain,
                                   const ExternalForce& f,
                                   std::shared_ptr<const QuadratureScheme> qs) {
  const CGMap* map = &cg;
  auto load_delta =
      std::make_shared<Vec>(load_correction(cg, chain, f, *qs));
  Potential pot = chain.potential;
  double eps = chain.epsilon;
  int n = cg.n;

  CoarseAssembly assembly;
  assembly.residual_extra = [map, qs, load_delta, pot, eps, n](
                                const Vec&, const Vec& u, Vec& rho) {
    // remove the reassigned bonds' exact projected terms
    for (const QuadBond& b : qs->bonds) {
      double r = b.shell + (u[b.atom + b.shell] - u[b.atom]) / eps;
      double val = b.frac * eps * shell_d1(pot, b.shell, r);
      for (SpMat::InnerIterator it(map->phi, b.atom); it; ++it)
        rho[it.row()] -= val * it.value();
      for (SpMat::InnerIterator it(map->phi, b.atom + b.shell); it; ++it)
        rho[it.row()] += val * it.value();
    }
    // add the one-point Cauchy-Born terms
    for (const QuadElement& qe : qs->elems) {
      const Element& el = map->elements[qe.element];
      double s = el.right_atom - el.left_atom;
      double fgrad = (u[el.right_atom] - u[el.left_atom]) / (s * eps);
      double p = qe.w1 * shell_d1(pot, 1, 1.0 + fgrad) +
                 2.0 * qe.w2 * shell_d1(pot, 2, 2.0 + 2.0 * fgrad);
      rho[el.left_dof] += eps * p / s;
      rho[el.right_dof] -= eps * p / s;
    }
    rho.head(n) += *load_delta;
  };

  // exact force-constant matrix with the reassigned bonds subtracted; their
  // replacement lives at coarse level in jacobian_extra
  Chain ch = chain;
  assembly.hessian_override = [ch, qs, pot, eps](const Vec& u) {
    std::vector<Triplet> trip;
    trip.reserve(4 * qs->bonds.size());
    for (const QuadBond& b : qs->bonds) {
      int j = b.atom, k = b.atom + b.shell;
      double r = b.shell + (u[k] - u[j]) / eps;
      double d2 = b.frac * shell_d2(pot, b.shell, r);
      trip.emplace_back(j, j, -d2);
      trip.emplace_back(j, k, d2);
      trip.emplace_back(k, k, -d2);
      trip.emplace_back(k, j, d2);
    }
    SpMat d(u.size(), u.size());
    d.setFromTriplets(trip.begin(), trip.end());
    return SpMat(hessian(ch, u) + d);
  };

  assembly.jacobian_extra = [map, qs, pot, eps](const Vec&, const Vec& u,
                                                SpMat& j00) {
    std::vector<Triplet> trip;
    trip.reserve(4 * qs->elems.size());
    for (const QuadElement& qe : qs->elems) {
      const Element& el = map->elements[qe.element];
      double s = el.right_atom - el.left_atom;
      double fgrad = (u[el.right_atom] - u[el.left_atom]) / (s * eps);
      double c = (qe.w1 * shell_d2(pot, 1, 1.0 + fgrad) +
                  4.0 * qe.w2 * shell_d2(pot, 2, 2.0 + 2.0 * fgrad)) /
                 (s * s);
      trip.emplace_back(el.left_dof, el.left_dof, c);
      trip.emplace_back(el.left_dof, el.right_dof, -c);
      trip.emplace_back(el.right_dof, el.right_dof, c);
      trip.emplace_back(el.right_dof, el.left_dof, -c);
    }
    SpMat d(j00.rows(), j00.cols());
    d.setFromTriplets(trip.begin(), trip.end());
    j00 += d;
  };
  return assembly;
}

SolveReport solve_galerkin_quadrature(const CGMap& cg, const Chain& chain,
                                      const ExternalForce& f,
                                      const NewtonOptions& opts) {
  auto qs = std::make_shared<const QuadratureScheme>(build_quadrature(cg));
  CoarseAssembly assembly = quadrature_assembly(cg, chain, f, qs);
  Model m = chain_model(chain, f);
  return solve_projected(m, cg, nullptr, "galerkin_quad", opts, &assembly);
}

SolveReport solve_enriched_quadrature(const CGMap& cg, const KrylovBasis& kb,
                                      const Chain& chain,
                                      const ExternalForce& f,
                                      const NewtonOptions& opts) {
  auto qs = std::make_shared<const QuadratureScheme>(build_quadrature(cg));
  CoarseAssembly assembly = quadrature_assembly(cg, chain, f, qs);
  Model m = chain_model(chain, f);
  return solve_projected(m, cg, &kb.vectors, "enriched_quad", opts, &assembly);
}

}  // namespace acc
