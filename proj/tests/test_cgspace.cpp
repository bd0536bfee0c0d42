#include <doctest.h>

#include "acc/cgspace.hpp"

using namespace acc;

TEST_CASE("hat bases form a partition of unity") {
  Chain c = make_chain(128);
  for (const RegionPartition& part :
       {left_continuum(128, 64, uniform_mesh(8)),
        left_continuum(128, 64, graded_mesh(1, 8)),
        five_region(128, 48, 80, uniform_mesh(4))}) {
    CGMap cg = build_cgmap(c, part);
    Vec sums = cg.phi.transpose() * Vec::Ones(cg.n);
    CHECK((sums - Vec::Ones(128)).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("bases are Kronecker deltas at coarse atoms") {
  Chain c = make_chain(128);
  CGMap cg = build_cgmap(c, left_continuum(128, 64, uniform_mesh(8)));
  for (int i = 0; i < cg.n; ++i) {
    for (int k = 0; k < cg.n; ++k)
      CHECK(cg.phi.coeff(i, cg.dof_atom[k]) == (i == k ? 1.0 : 0.0));
    CHECK(cg.dof_of_atom(cg.dof_atom[i]) == i);
  }
}

TEST_CASE("mass matrix is symmetric positive definite") {
  Chain c = make_chain(128);
  CGMap cg = build_cgmap(c, left_continuum(128, 64, graded_mesh(1, 8)));
  Mat m(cg.mass());
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("P is an orthogonal-complement projector pair with Q") {
  Chain c = make_chain(96);
  CGMap cg = build_cgmap(c, left_continuum(96, 48, uniform_mesh(4)));
  Vec v = Vec::Random(96);
  Vec pv = cg.apply_p(v);
  CHECK((cg.apply_p(pv) - pv).lpNorm<Eigen::Infinity>() < 1e-12);  // P^2 = P
  Vec qv = cg.apply_q(v);
  CHECK((pv + qv - v).lpNorm<Eigen::Infinity>() < 1e-14);          // Q = I - P
  CHECK((cg.apply_p(qv)).lpNorm<Eigen::Infinity>() < 1e-12);       // PQ = 0
  // Range(P) contains the coarse space: P Phi^T = Phi^T
  Mat pt = cg.apply_p(Mat(cg.phi.transpose()));
  CHECK((pt - Mat(cg.phi.transpose())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("graded meshes refine toward the interface") {
  Chain c = make_chain(256);
  CGMap cg = build_cgmap(c, left_continuum(256, 128, graded_mesh(1, 8)));
  // walk elements right-to-left from the interface: strides 1, 2, 4, 8, 8 ...
  std::vector<int> strides;
  for (const Element& e : cg.elements)
    if (e.continuum) strides.push_back(e.right_atom - e.left_atom);
  REQUIRE(strides.size() >= 4);
  CHECK(strides.back() == 1);
  CHECK(strides[strides.size() - 2] == 2);
  CHECK(strides[strides.size() - 3] == 4);
  // away from the interface the elements sit at the cap, except for a
  // possible truncated remainder at the far end of the segment
  CHECK(strides.front() <= 8);
  int at_cap = 0;
  for (int s : strides)
    if (s == 8) ++at_cap;
  CHECK(at_cap >= static_cast<int>(strides.size()) - 4);
}

TEST_CASE("atomistic atoms are all retained as dofs") {
  Chain c = make_chain(128);
  CGMap cg = build_cgmap(c, left_continuum(128, 64, uniform_mesh(8)));
  for (int atom = 64; atom < 128; ++atom) CHECK(cg.dof_of_atom(atom) >= 0);
  // coarse region keeps every stride-th atom
  int coarse_dofs = 0;
  for (int atom = 0; atom < 64; ++atom)
    if (cg.dof_of_atom(atom) >= 0) ++coarse_dofs;
  CHECK(coarse_dofs == 64 / 8);
}

TEST_CASE("paper-scale left-half coarsening yields 576 dofs") {
  Chain c = make_chain(1024);
  CGMap cg = build_cgmap(c, left_continuum(1024, 512, uniform_mesh(8)));
  CHECK(cg.n == 576);
}

TEST_CASE("quadrature eligibility spares interfaces and chain ends") {
  Chain c = make_chain(256);
  RegionPartition part = left_continuum(256, 128, uniform_mesh(8));
  part.interbedded_elems = 2;
  CGMap cg = build_cgmap(c, part);
  int continuum = 0, eligible = 0;
  for (size_t i = 0; i < cg.elements.size(); ++i) {
    const Element& e = cg.elements[i];
    if (e.continuum) ++continuum;
    if (e.quadrature) {
      ++eligible;
      CHECK(e.continuum);
      CHECK(i > 0);
      CHECK(i + 1 < cg.elements.size());
    }
  }
  // two interbedded elements are exactly summed at the continuum/atomistic
  // interface, and the first chain element is always exact
  CHECK(eligible == continuum - 3);
  CHECK_FALSE(cg.elements.front().quadrature);
  CHECK_FALSE(cg.elements.back().quadrature);
}

TEST_CASE("invalid partitions are rejected") {
  Chain c = make_chain(64);
  CHECK_THROWS_AS(left_continuum(64, 0, uniform_mesh(8)), InvalidPartition);
  CHECK_THROWS_AS(left_continuum(64, 64, uniform_mesh(8)), InvalidPartition);
  CHECK_THROWS_AS(five_region(64, 40, 30, uniform_mesh(4)), InvalidPartition);
  CHECK_THROWS_AS(build_cgmap(c, RegionPartition{}), InvalidPartition);
}
