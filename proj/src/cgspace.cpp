#include "acc/cgspace.hpp"

#include <algorithm>
#include <set>

namespace acc {

RegionPartition all_atomistic(int n_atoms) {
  RegionPartition p;
  p.segments.push_back(Segment{true, 0, n_atoms - 1, {}});
  return p;
}

RegionPartition left_continuum(int n_atoms, int split, MeshSpec mesh) {
  if (split < 2 || split >= n_atoms - 1)
    throw InvalidPartition("left_continuum: bad split");
  RegionPartition p;
  p.segments.push_back(Segment{false, 0, split - 1, mesh});
  p.segments.push_back(Segment{true, split, n_atoms - 1, {}});
  return p;
}

RegionPartition five_region(int n_atoms, int a_first, int a_last, MeshSpec mesh,
                            int interbedded_elems) {
  if (a_first < 2 || a_last <= a_first || a_last >= n_atoms - 2)
    throw InvalidPartition("five_region: bad atomistic window");
  RegionPartition p;
  p.interbedded_elems = interbedded_elems;
  p.segments.push_back(Segment{false, 0, a_first - 1, mesh});
  p.segments.push_back(Segment{true, a_first, a_last, {}});
  p.segments.push_back(Segment{false, a_last + 1, n_atoms - 1, mesh});
  return p;
}

namespace {

void validate(const Chain& chain, const RegionPartition& part) {
  const auto& segs = part.segments;
  if (segs.empty()) throw InvalidPartition("empty partition");
  if (segs.front().first != 0 || segs.back().last != chain.n_atoms - 1)
    throw InvalidPartition("partition does not cover the chain");
  for (size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].last < segs[i].first)
      throw InvalidPartition("segment with negative length");
    if (i > 0 && segs[i].first != segs[i - 1].last + 1)
      throw InvalidPartition("segments must be contiguous and ordered");
    if (i > 0 && segs[i].atomistic == segs[i - 1].atomistic)
      throw InvalidPartition("adjacent segments of the same kind");
  }
}

// Node atoms of a continuum segment. Graded meshes grow away from the
// atomistic neighbor; the endpoint adjacent to an atomistic segment is owned
// by that segment (its atom is a coarse variable already).
std::vector<int> segment_nodes(const Segment& s, bool atomistic_left,
                               bool atomistic_right) {
  std::vector<int> nodes;
  int len = s.last - s.first + 1;
  const MeshSpec& m = s.mesh;
  auto sizes_from = [&](int total) {
    std::vector<int> sz;
    int h = (m.grading == MeshSpec::Grading::Graded) ? m.initial : m.stride;
    int used = 0, at_size = 0;
    while (used < total) {
      int step = std::min(h, total - used);
      sz.push_back(step);
      used += step;
      if (m.grading == MeshSpec::Grading::Graded && h < m.cap &&
          ++at_size >= std::max(1, m.repeat)) {
        h = std::min(2 * h, m.cap);
        at_size = 0;
      }
    }
    return sz;
  };
  if (atomistic_right && !atomistic_left) {
    // walk leftward from the interface at s.last + 1
    auto sz = sizes_from(len);
    int pos = s.last + 1;
    for (int h : sz) {
      pos -= h;
      nodes.push_back(pos);
    }
    std::sort(nodes.begin(), nodes.end());
  } else if (atomistic_left && !atomistic_right) {
    auto sz = sizes_from(len);
    int pos = s.first - 1;
    for (int h : sz) {
      pos += h;
      nodes.push_back(pos);
    }
  } else {
    // no atomistic neighbor (or both): uniform walk from the left
    auto sz = sizes_from(len);
    int pos = s.first;
    nodes.push_back(pos);
    for (int h : sz) {
      pos += h;
      if (pos <= s.last) nodes.push_back(pos);
    }
  }
  // chain-end boundaries must carry a node
  if (!atomistic_left && (nodes.empty() || nodes.front() != s.first))
    nodes.insert(nodes.begin(), s.first);
  if (!atomistic_right && nodes.back() != s.last) nodes.push_back(s.last);
  return nodes;
}

}  // namespace

const SparseFactor& CGMap::mass_factor() const {
  if (!m_factor_)
    m_factor_ = std::make_shared<SparseFactor>(m_, Symmetry::Spd);
  return *m_factor_;
}

Vec CGMap::apply_p(const Vec& v) const {
  return phi.transpose() * mass_factor().solve(Vec(phi * v));
}

Mat CGMap::apply_p(const Mat& v) const {
  return phi.transpose() * mass_factor().solve(Mat(phi * v));
}

Vec CGMap::apply_q(const Vec& v) const { return v - apply_p(v); }

Mat CGMap::apply_q(const Mat& v) const { return v - apply_p(v); }

int CGMap::dof_of_atom(int atom) const {
  auto it = std::lower_bound(dof_atom.begin(), dof_atom.end(), atom);
  if (it == dof_atom.end() || *it != atom) return -1;
  return static_cast<int>(it - dof_atom.begin());
}

CGMap build_cgmap(const Chain& chain, const RegionPartition& part) {
  validate(chain, part);
  const auto& segs = part.segments;
  int n_atoms = chain.n_atoms;

  std::set<int> coarse;
  for (size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    if (s.atomistic) {
      for (int a = s.first; a <= s.last; ++a) coarse.insert(a);
    } else {
      bool al = i > 0;  // neighbors alternate, so any neighbor is atomistic
      bool ar = i + 1 < segs.size();
      for (int a : segment_nodes(s, al, ar)) {
        if (a < s.first || a > s.last)
          throw InvalidPartition("mesh node outside its segment");
        coarse.insert(a);
      }
    }
  }

  CGMap cg;
  cg.partition = part;
  cg.n_atoms = n_atoms;
  cg.dof_atom.assign(coarse.begin(), coarse.end());
  cg.n = static_cast<int>(cg.dof_atom.size());

  // hat basis rows; Kronecker rows fall out when both neighbors are adjacent
  std::vector<Triplet> trip;
  for (int i = 0; i < cg.n; ++i) {
    int a = cg.dof_atom[i];
    int left = (i > 0) ? cg.dof_atom[i - 1] : a;
    int right = (i + 1 < cg.n) ? cg.dof_atom[i + 1] : a;
    trip.emplace_back(i, a, 1.0);
    for (int j = left + 1; j < a; ++j)
      trip.emplace_back(i, j, double(j - left) / double(a - left));
    for (int j = a + 1; j < right; ++j)
      trip.emplace_back(i, j, double(right - j) / double(right - a));
  }
  cg.phi.resize(cg.n, n_atoms);
  cg.phi.setFromTriplets(trip.begin(), trip.end());

  for (size_t i = 0; i < segs.size(); ++i)
    if (segs[i].atomistic) {
      if (i > 0) cg.interface_atoms.push_back(segs[i].first);
      if (i + 1 < segs.size()) cg.interface_atoms.push_back(segs[i].last);
    }

  // element list with quadrature eligibility
  for (int i = 0; i + 1 < cg.n; ++i) {
    Element e;
    e.left_atom = cg.dof_atom[i];
    e.right_atom = cg.dof_atom[i + 1];
    e.left_dof = i;
    e.right_dof = i + 1;
    // the element lies in an atomistic segment iff both ends do and it has
    // no interior atoms
    bool atomistic_pair = false;
    for (const Segment& s : segs)
      if (s.atomistic && e.left_atom >= s.first && e.right_atom <= s.last)
        atomistic_pair = true;
    e.continuum = !atomistic_pair;
    cg.elements.push_back(e);
  }
  // quadrature: continuum elements farther than interbedded_elems (counted in
  // continuum elements) from an atomistic interface, and never the first or
  // last element of the chain (boundary rows stay exact)
  int ne = static_cast<int>(cg.elements.size());
  for (int i = 0; i < ne; ++i) {
    Element& e = cg.elements[i];
    if (!e.continuum || i == 0 || i == ne - 1) continue;
    int dist_l = 0;
    for (int j = i - 1; j >= 0 && cg.elements[j].continuum; --j) ++dist_l;
    int dist_r = 0;
    for (int j = i + 1; j < ne && cg.elements[j].continuum; ++j) ++dist_r;
    bool if_left = (i - dist_l - 1 >= 0);   // atomistic segment to the left
    bool if_right = (i + dist_r + 1 < ne);  // and to the right
    e.quadrature = !(if_left && dist_l < part.interbedded_elems) &&
                   !(if_right && dist_r < part.interbedded_elems);
  }

  cg.m_ = SpMat(cg.phi * SpMat(cg.phi.transpose()));
  return cg;
}

}  // namespace acc
