#include <doctest.h>

#include <polymor/kron.hpp>

#include "helpers.hpp"

using namespace polymor;

TEST_CASE("kron_pow matches the definition") {
  VecX v(2);
  v << 1, 2;
  VecX expect(4);
  expect << 1, 2, 2, 4;
  CHECK(kron_pow(v, 2).isApprox(expect));
  CHECK(kron_pow(v, 1).isApprox(v));
  CHECK_THROWS(kron_pow(v, 0));
}

TEST_CASE("kron_pow degree 3 against a nested-loop oracle") {
  VecX v(3);
  v << 1, -1, 2;
  const VecX got = kron_pow(v, 3);
  REQUIRE(got.size() == 27);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 3; ++k)
        CHECK(got[9 * i + 3 * j + k] == doctest::Approx(v[i] * v[j] * v[k]).epsilon(1e-15));
}

TEST_CASE("kron_pow stacks one factor at a time") {
  std::mt19937 rng(7);
  const VecX v = oracle::random_vec(4, rng);
  for (int xi = 2; xi <= 4; ++xi) {
    const VecX lhs = kron_pow(v, xi);
    const VecX prev = kron_pow(v, xi - 1);
    VecX rhs(prev.size() * v.size());
    for (Index i = 0; i < prev.size(); ++i) rhs.segment(i * v.size(), v.size()) = prev[i] * v;
    CHECK((lhs - rhs).norm() == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("row_kron single-row and identity cases") {
  MatX f1(1, 2), f2(1, 2);
  f1 << 1, 2;
  f2 << 3, 4;
  MatX expect(1, 4);
  expect << 3, 4, 6, 8;
  CHECK(row_kron({f1, f2}).isApprox(expect));

  const MatX eye = MatX::Identity(2, 2);
  const MatX rk = row_kron({eye, eye});
  MatX want = MatX::Zero(2, 4);
  want(0, 0) = 1;  // e1 ⊗ e1
  want(1, 3) = 1;  // e2 ⊗ e2
  CHECK(rk.isApprox(want));

  MatX bad(3, 2);
  CHECK_THROWS(row_kron({f1, bad}));
  CHECK(row_kron({f1}).isApprox(f1));
}

TEST_CASE("row_kron product identity equals the Hadamard chain") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const MatX F1 = oracle::random_dense(4, 2, rng);
    const MatX F2 = oracle::random_dense(4, 3, rng);
    const MatX F3 = oracle::random_dense(4, 2, rng);
    const VecX p1 = oracle::random_vec(2, rng);
    const VecX p2 = oracle::random_vec(3, rng);
    const VecX p3 = oracle::random_vec(2, rng);

    const MatX rk = row_kron({F1, F2, F3});
    const VecX kron_p = oracle::dense_kron({p1, p2, p3});
    const VecX lhs = rk * kron_p;
    const VecX rhs = (F1 * p1).cwiseProduct(F2 * p2).cwiseProduct(F3 * p3);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());

    // The full matrix agrees with the dense Kronecker oracle row by row.
    for (Index i = 0; i < 4; ++i) {
      const MatX r = oracle::dense_kron({F1.row(i), F2.row(i), F3.row(i)});
      CHECK((rk.row(i) - r).norm() <= 1e-14 * (1.0 + r.norm()));
    }
  }
}

namespace {

ModeUnfolding small_unfolding(const MatX& dense, std::vector<Index> dims) {
  ModeUnfolding m;
  m.dims = std::move(dims);
  m.mode = 1;
  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0) trip.emplace_back(i, j, dense(i, j));
  m.data.resize(dense.rows(), dense.cols());
  m.data.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

TEST_CASE("mode-2 matricization of a 2x2x2 tensor") {
  MatX m1(2, 4);
  m1 << 1, 2, 3, 4, 5, 6, 7, 8;
  const ModeUnfolding u1 = small_unfolding(m1, {2, 2, 2});
  const ModeUnfolding u2 = mode2_from_mode1(u1);

  // Oracle: rebuild the 3-way tensor explicitly and reshape along mode 2.
  // Mode-1 columns run with i2 fastest: col = (i2) + 2*(i3).
  double T[2][2][2];
  for (Index i1 = 0; i1 < 2; ++i1)
    for (Index i3 = 0; i3 < 2; ++i3)
      for (Index i2 = 0; i2 < 2; ++i2) T[i1][i2][i3] = m1(i1, i2 + 2 * i3);
  MatX expect(2, 4);
  for (Index i2 = 0; i2 < 2; ++i2)
    for (Index i3 = 0; i3 < 2; ++i3)
      for (Index i1 = 0; i1 < 2; ++i1) expect(i2, i1 + 2 * i3) = T[i1][i2][i3];

  CHECK(MatX(u2.data).isApprox(expect));
  MatX hard(2, 4);
  hard << 1, 5, 3, 7, 2, 6, 4, 8;
  CHECK(MatX(u2.data).isApprox(hard));
}

TEST_CASE("mode-2 of a fully symmetric diagonal tensor equals mode-1") {
  MatX m1 = MatX::Zero(3, 9);
  for (Index i = 0; i < 3; ++i) m1(i, i + 3 * i) = static_cast<double>(i + 1);
  const ModeUnfolding u1 = small_unfolding(m1, {3, 3, 3});
  const ModeUnfolding u2 = mode2_from_mode1(u1);
  CHECK(MatX(u2.data).isApprox(MatX(u1.data)));
}

TEST_CASE("mode-2 permutation round-trips bit-exactly") {
  std::mt19937 rng(23);
  const MatX dense = oracle::random_dense(3, 2 * 4, rng);
  const ModeUnfolding u1 = small_unfolding(dense, {3, 2, 4});
  const ModeUnfolding back = mode1_from_mode2(mode2_from_mode1(u1));
  REQUIRE(back.data.rows() == u1.data.rows());
  REQUIRE(back.data.cols() == u1.data.cols());
  CHECK(MatX(back.data) == MatX(u1.data));
}

TEST_CASE("contract_vectors reduces to a matrix-vector product for N=2") {
  std::mt19937 rng(3);
  const MatX M = oracle::random_dense(4, 5, rng);
  const VecX a2 = oracle::random_vec(5, rng);
  const ModeUnfolding u = small_unfolding(M, {4, 5});
  const VecX got = contract_vectors(u, {a2});
  CHECK((got - M * a2).norm() <= 1e-14 * (M * a2).norm());
}

TEST_CASE("full-contraction scalar identity across modes 1 and 2") {
  std::mt19937 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const MatX dense = oracle::random_dense(3, 9, rng);
    const ModeUnfolding u1 = small_unfolding(dense, {3, 3, 3});
    const ModeUnfolding u2 = mode2_from_mode1(u1);
    const VecX a1 = oracle::random_vec(3, rng);
    const VecX a2 = oracle::random_vec(3, rng);
    const VecX a3 = oracle::random_vec(3, rng);

    const double lhs = a1.dot(VecX(u1.data.cast<double>() * oracle::dense_kron({a3, a2})));
    const double rhs = a2.dot(VecX(u2.data.cast<double>() * oracle::dense_kron({a3, a1})));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

    // And contract_vectors agrees with the dense evaluation.
    const VecX via_lib = contract_vectors(u1, {a2, a3});
    const VecX via_dense = dense * oracle::dense_kron({a3, a2});
    CHECK((via_lib - via_dense).norm() <= 1e-12 * via_dense.norm());
  }
}

TEST_CASE("selector vectors extract a tensor fiber") {
  std::mt19937 rng(9);
  const MatX dense = oracle::random_dense(3, 9, rng);
  const ModeUnfolding u1 = small_unfolding(dense, {3, 3, 3});
  VecX e1 = VecX::Zero(3);
  e1[0] = 1;
  const VecX got = contract_vectors(u1, std::vector<VecX>{e1, e1});
  CHECK(got.isApprox(VecX(dense.col(0))));
}

TEST_CASE("kron_contract agrees with dense evaluation on small tensors") {
  std::mt19937 rng(31);
  // Random shapes with total size <= 1e4.
  const std::vector<std::vector<Index>> shapes = {{4, 3, 5}, {2, 6, 3, 2}, {7, 9}};
  for (const auto& dims : shapes) {
    Index cols = 1;
    for (std::size_t k = 1; k < dims.size(); ++k) cols *= dims[k];
    const MatX dense = oracle::random_dense(dims[0], cols, rng);
    const ModeUnfolding u = small_unfolding(dense, dims);

    std::vector<MatX> factors;
    std::vector<Index> slots;
    std::vector<MatX> rev;
    for (std::size_t k = dims.size(); k-- > 1;) {
      slots.push_back(dims[k]);
      factors.push_back(oracle::random_dense(dims[k], 2, rng));
    }
    const MatX got = kron_contract(u.data, slots, factors);
    const MatX expect = dense * oracle::dense_kron(factors);
    CHECK((got - expect).norm() <= 1e-12 * expect.norm());
  }
}
