#pragma once

#include <vector>

#include "acc/cgspace.hpp"
#include "acc/chain.hpp"
#include "acc/model.hpp"

namespace acc {

/// Per-atom region flag from a partition: 1 = atomistic, 0 = local.
std::vector<char> atomistic_mask(const RegionPartition& part, int n_atoms);

/// Energy-based quasi-nonlocal coupling at full resolution. A second-shell
/// bond whose atoms all lie in an atomistic region keeps its pair term; any
/// other is split into two single-gap halves (the ghost-force-free rule).
/// Under extrapolated boundaries a local chain end also recovers the half of
/// the bond sticking out of the chain, suppressing the surface layer.
Model qnl_model(const Chain& chain, const RegionPartition& part,
                const ExternalForce& f);

SolveReport solve_qnl(const Chain& chain, const RegionPartition& part,
                      const ExternalForce& f, const NewtonOptions& opts = {});

/// Force-based coupling: atomistic rows keep the exact force balance, local
/// rows use the Cauchy-Born stress difference of the neighboring gaps. Not an
/// energy gradient; the Jacobian is nonsymmetric.
Model force_based_model(const Chain& chain, const RegionPartition& part,
                        const ExternalForce& f);

SolveReport solve_force_based(const Chain& chain, const RegionPartition& part,
                              const ExternalForce& f,
                              const NewtonOptions& opts = {});

}  // namespace acc
