#pragma once

#include <memory>
#include <vector>

#include "acc/chain.hpp"
#include "acc/solvers.hpp"
#include "acc/types.hpp"

namespace acc {

/// Node layout inside a continuum segment.
struct MeshSpec {
  enum class Grading { Uniform, Graded };
  Grading grading = Grading::Uniform;
  int stride = 8;   ///< Uniform: atoms per element
  int initial = 1;  ///< Graded: first element size at the interface
  int cap = 8;      ///< Graded: element size ceiling after doubling
  int repeat = 1;   ///< Graded: elements of each size before doubling
};

inline MeshSpec uniform_mesh(int stride) {
  return MeshSpec{MeshSpec::Grading::Uniform, stride, 1, stride, 1};
}
/// Element sizes initial, 2*initial, 4*initial, ... capped, growing away
/// from the atomistic interface; each size is used `repeat` times.
inline MeshSpec graded_mesh(int initial = 1, int cap = 8, int repeat = 1) {
  return MeshSpec{MeshSpec::Grading::Graded, cap, initial, cap, repeat};
}

struct Segment {
  bool atomistic = true;
  int first = 0, last = -1;  ///< inclusive atom range
  MeshSpec mesh;             ///< continuum segments only
};

struct RegionPartition {
  std::vector<Segment> segments;
  int interbedded_elems = 2;  ///< exact-summation band at each interface
};

RegionPartition all_atomistic(int n_atoms);
/// Continuum on [0, split-1], atomistic on [split, n-1].
RegionPartition left_continuum(int n_atoms, int split, MeshSpec mesh);
/// continuum / atomistic / continuum with the atomistic window [a_first, a_last].
RegionPartition five_region(int n_atoms, int a_first, int a_last, MeshSpec mesh,
                            int interbedded_elems = 2);

/// Interval between two consecutive coarse atoms.
struct Element {
  int left_atom = 0, right_atom = 0;  ///< coarse atoms bounding the element
  int left_dof = 0, right_dof = 0;
  bool continuum = false;   ///< has coarse structure (not an atomistic pair)
  bool quadrature = false;  ///< eligible for Cauchy-Born quadrature
};

/// The coarse-graining operator Phi with its partition, mesh elements, mass
/// matrix and cached factorization. Immutable after construction.
class CGMap {
 public:
  SpMat phi;  ///< n x N, row i = basis of coarse atom dof_atom[i]
  int n = 0, n_atoms = 0;
  std::vector<int> dof_atom;  ///< increasing
  std::vector<Element> elements;
  std::vector<int> interface_atoms;  ///< first atomistic atom at each interface
  RegionPartition partition;

  const SpMat& mass() const { return m_; }
  const SparseFactor& mass_factor() const;

  /// P v with P = Phi^T M^{-1} Phi (never forms Psi).
  Vec apply_p(const Vec& v) const;
  Mat apply_p(const Mat& v) const;
  /// Q v = v - P v.
  Vec apply_q(const Vec& v) const;
  Mat apply_q(const Mat& v) const;

  /// Coarse dof index of an atom that is itself a coarse variable, or -1.
  int dof_of_atom(int atom) const;

 private:
  friend CGMap build_cgmap(const Chain&, const RegionPartition&);
  SpMat m_;
  mutable std::shared_ptr<SparseFactor> m_factor_;
};

CGMap build_cgmap(const Chain& chain, const RegionPartition& partition);

/// M = Phi Phi^T assembled exactly over atom sites.
inline const SpMat& mass_matrix(const CGMap& cg) { return cg.mass(); }

}  // namespace acc
