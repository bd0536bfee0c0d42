#pragma once

#include <functional>
#include <vector>

#include "acc/chain.hpp"
#include "acc/types.hpp"

namespace acc {

/// A molecular-statics problem in residual form, shared by the chain and the
/// crack model. scaled_residual pairs with scaled_hessian as a Newton system:
/// interior rows are eps^2 * (f - grad V), pinned rows are -u_j against an
/// identity Jacobian row.
struct Model {
  int n_atoms = 0;
  double epsilon = 0;
  std::vector<int> pinned;
  std::function<Vec(const Vec&)> scaled_residual;
  std::function<SpMat(const Vec&)> scaled_hessian;
};

inline Model chain_model(const Chain& c, const ExternalForce& f) {
  Model m;
  m.n_atoms = c.n_atoms;
  m.epsilon = c.epsilon;
  m.pinned = pinned_atoms(c);
  m.scaled_residual = [c, f](const Vec& u) { return scaled_residual(c, u, f); };
  m.scaled_hessian = [c](const Vec& u) { return hessian(c, u); };
  return m;
}

}  // namespace acc
