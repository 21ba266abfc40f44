#include <doctest.h>

#include <cmath>
#include <numeric>

#include "eigengaze/linalg.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eigengaze;

namespace {

void check_decomposition(const SymMatrix& q, const EigenDecomposition& e) {
  const std::size_t n = q.order();
  REQUIRE(e.values.size() == n);
  REQUIRE(e.vectors.size() == n);
  for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(dot(e.vectors[i], e.vectors[j]) - (i == j ? 1.0 : 0.0)) <= 1e-8);
    double res = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double qv = 0.0;
      for (std::size_t c = 0; c < n; ++c) qv += q(r, c) * e.vectors[i][c];
      res += (qv - e.values[i] * e.vectors[i][r]) * (qv - e.values[i] * e.vectors[i][r]);
    }
    CHECK(std::sqrt(res) <= 1e-8 * (1.0 + std::abs(e.values[i])));
  }
  const double sum = std::accumulate(e.values.begin(), e.values.end(), 0.0);
  CHECK(std::abs(sum - q.trace()) <= 1e-8 * (1.0 + std::abs(q.trace())));
}

}  // namespace

TEST_CASE("SymMatrix invariants") {
  CHECK_NOTHROW(SymMatrix(2, {1, 2, 2, 1}));
  CHECK_ERROR_CODE(SymMatrix(2, {1, 2, 3, 1}), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(SymMatrix(2, {1, 2, 2}), ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(SymMatrix(1, {INFINITY}), ErrorCode::InvalidArgument);
  SymMatrix m(3);
  m.set(0, 2, 5.0);
  CHECK(m(2, 0) == 5.0);
  CHECK(m.frobenius_norm() == doctest::Approx(std::sqrt(50.0)));
}

TEST_CASE("sym_eigen: identity gives the standard basis") {
  const SymMatrix id(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto e = sym_eigen(id);
  CHECK(e.values == std::vector<double>{1, 1, 1});
  CHECK(e.vectors[0] == std::vector<double>{1, 0, 0});
  CHECK(e.vectors[1] == std::vector<double>{0, 1, 0});
  CHECK(e.vectors[2] == std::vector<double>{0, 0, 1});
}

TEST_CASE("sym_eigen: 2x2 closed form") {
  const auto e = sym_eigen(SymMatrix(2, {2, 1, 1, 2}));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.vectors[0][0] == doctest::Approx(h).epsilon(1e-14));
  CHECK(e.vectors[0][1] == doctest::Approx(h).epsilon(1e-14));
  // tie on magnitude: the first component decides the sign
  CHECK(e.vectors[1][0] == doctest::Approx(h).epsilon(1e-14));
  CHECK(e.vectors[1][1] == doctest::Approx(-h).epsilon(1e-14));
}

TEST_CASE("sym_eigen: diagonal, zero and 1x1 matrices") {
  const auto d = sym_eigen(SymMatrix(3, {1, 0, 0, 0, 5, 0, 0, 0, -2}));
  CHECK(d.values == std::vector<double>{5, 1, -2});
  CHECK(d.vectors[0] == std::vector<double>{0, 1, 0});
  CHECK(d.sweeps == 0);
  const auto z = sym_eigen(SymMatrix(2));
  CHECK(z.values == std::vector<double>{0, 0});
  const auto one = sym_eigen(SymMatrix(1, {-4}));
  CHECK(one.values == std::vector<double>{-4});
  CHECK(one.vectors[0] == std::vector<double>{1});
}

TEST_CASE("sym_eigen: random 8x8 against characteristic-polynomial bisection") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix q = oracle::random_symmetric(rng, 8, 3.0);
    const auto e = sym_eigen(q);
    check_decomposition(q, e);
    const auto ref = oracle::bisection_eigenvalues(oracle::to_matrix(q));
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(e.values[i] - ref[i]) <= 1e-7);
  }
}

TEST_CASE("sym_eigen: 3x3 against the cubic oracle") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const SymMatrix q = oracle::random_symmetric(rng, 3, 10.0);
    const auto e = sym_eigen(q);
    const auto ref = oracle::cubic_eigenvalues(oracle::to_matrix(q));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(e.values[i] - ref[i]) <= 1e-7);
  }
}

TEST_CASE("oracles agree with each other on known spectra") {
  // Q = V diag(4, 1, -2) V^T with a rotation V
  const double c = std::cos(0.7), s = std::sin(0.7);
  const double v[3][3] = {{c, -s, 0}, {s, c, 0}, {0, 0, 1}};
  const double lam[3] = {4, 1, -2};
  oracle::Matrix a(3, std::vector<double>(3, 0.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) a[i][j] += v[i][k] * lam[k] * v[j][k];
  const auto cubic = oracle::cubic_eigenvalues(a);
  const auto bis = oracle::bisection_eigenvalues(a);
  for (int i = 0; i < 3; ++i) {
    CHECK(cubic[i] == doctest::Approx(lam[i]).epsilon(1e-10));
    CHECK(bis[i] == doctest::Approx(lam[i]).epsilon(1e-10));
  }
  const oracle::Matrix twice{{2, 0, 0}, {0, 2, 0}, {0, 0, 5}};
  const auto dbl = oracle::cubic_eigenvalues(twice);
  CHECK(dbl[0] == doctest::Approx(5));
  CHECK(dbl[1] == doctest::Approx(2).epsilon(1e-7));
  CHECK(dbl[2] == doctest::Approx(2).epsilon(1e-7));
}

TEST_CASE("property: decomposition invariants over random orders and scales") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const double scale = std::pow(10.0, static_cast<double>(rng.below(7)) - 3.0);
    const SymMatrix q = oracle::random_symmetric(rng, n, scale);
    check_decomposition(q, sym_eigen(q));
  }
}

TEST_CASE("property: repeated eigenvalues") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // rank-one update of a multiple of the identity: eigenvalue 2 has multiplicity n-1
    const std::size_t n = 2 + rng.below(8);
    const auto u = oracle::random_vector(rng, n);
    SymMatrix q(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) q.set(i, j, (i == j ? 2.0 : 0.0) + u[i] * u[j]);
    const auto e = sym_eigen(q);
    check_decomposition(q, e);
    for (std::size_t i = 1; i < n; ++i) CHECK(e.values[i] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("sym_eigen: sweep limit") {
  SplitMix64 rng(1);
  const SymMatrix q = oracle::random_symmetric(rng, 6);
  JacobiOptions opts;
  opts.max_sweeps = 1;
  CHECK_ERROR_CODE(sym_eigen(q, opts), ErrorCode::NoConvergence);
  opts.max_sweeps = 0;
  CHECK_ERROR_CODE(sym_eigen(q, opts), ErrorCode::InvalidArgument);
}

TEST_CASE("canonicalize_sign") {
  std::vector<double> a{0.1, -0.9, 0.3};
  canonicalize_sign(a);
  CHECK(a == std::vector<double>{-0.1, 0.9, -0.3});
  std::vector<double> tie{-0.5, 0.5};
  canonicalize_sign(tie);
  CHECK(tie == std::vector<double>{0.5, -0.5});
  std::vector<double> near{-0.5, 0.5 * (1 + 1e-12)};
  canonicalize_sign(near);
  CHECK(near[0] > 0.0);
  std::vector<double> zero{0.0, 0.0};
  canonicalize_sign(zero);
  CHECK(zero == std::vector<double>{0.0, 0.0});
}

TEST_CASE("gram_pca: closed-form cases") {
  SUBCASE("single column, uncentered") {
    const std::vector<std::vector<double>> x{{3, 4}};
    const auto p = gram_pca(x, false);
    REQUIRE(p.eigenvalues.size() == 1);
    CHECK(p.eigenvalues[0] == doctest::Approx(25.0).epsilon(1e-14));
    CHECK(p.basis[0][0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(p.basis[0][1] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(p.mean == std::vector<double>{0, 0});
  }
  SUBCASE("identical columns, centered") {
    const std::vector<std::vector<double>> x{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    const auto p = gram_pca(x, true);
    CHECK(p.basis.empty());
    CHECK(p.eigenvalues.empty());
    CHECK(p.mean == std::vector<double>{1, 2, 3});
  }
  SUBCASE("single column, centered") {
    const std::vector<std::vector<double>> x{{1, 2}};
    CHECK(gram_pca(x, true).basis.empty());
  }
  SUBCASE("bad input") {
    CHECK_ERROR_CODE(gram_pca(std::vector<std::vector<double>>{}, true), ErrorCode::InvalidArgument);
    const std::vector<std::vector<double>> ragged{{1, 2}, {1}};
    CHECK_ERROR_CODE(gram_pca(ragged, true), ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("property: gram_pca matches the direct d x d decomposition") {
  SplitMix64 rng(36);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t d = 1 + rng.below(12), m = 1 + rng.below(6);
    const bool centered = rng.below(2) == 0;
    std::vector<std::vector<double>> x;
    for (std::size_t j = 0; j < m; ++j) x.push_back(oracle::random_vector(rng, d));
    const auto p = gram_pca(x, centered);

    std::vector<double> mean;
    const auto direct = sym_eigen(oracle::direct_scatter(x, centered, &mean));
    for (std::size_t i = 0; i < d; ++i) CHECK(p.mean[i] == doctest::Approx(mean[i]).epsilon(1e-14));
    std::size_t nonzero = 0;
    for (double v : direct.values) nonzero += v > retention_floor(direct.values[0]) ? 1 : 0;
    REQUIRE(p.eigenvalues.size() == nonzero);
    for (std::size_t i = 0; i < nonzero; ++i) {
      CHECK(std::abs(p.eigenvalues[i] - direct.values[i]) <= 1e-9 * direct.values[i]);
      for (std::size_t c = 0; c < d; ++c) CHECK(std::abs(p.basis[i][c] - direct.vectors[i][c]) <= 1e-7);
      for (std::size_t j = 0; j < nonzero; ++j)
        CHECK(std::abs(dot(p.basis[i], p.basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("property: reconstruction error vanishes at full rank and never grows with k") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 4 + rng.below(9), m = 2 + rng.below(5);
    std::vector<std::vector<double>> x;
    for (std::size_t j = 0; j < m; ++j) x.push_back(oracle::random_vector(rng, d));
    const auto p = gram_pca(x, true);
    double previous = INFINITY;
    for (std::size_t k = 0; k <= p.basis.size(); ++k) {
      double err = 0.0;
      for (const auto& col : x) {
        std::vector<double> r(d);
        for (std::size_t i = 0; i < d; ++i) r[i] = col[i] - p.mean[i];
        for (std::size_t b = 0; b < k; ++b) {
          const double c = dot(p.basis[b], r);
          for (std::size_t i = 0; i < d; ++i) r[i] -= c * p.basis[b][i];
        }
        err += dot(r, r);
      }
      err = std::sqrt(err);
      CHECK(err <= previous + 1e-12);
      previous = err;
    }
    CHECK(previous <= 1e-8);
  }
}

TEST_CASE("choose_k") {
  const std::vector<double> single{5, 0, 0}, four{4, 3, 2, 1};
  CHECK(choose_k(single, 0.9) == 1);
  CHECK(choose_k(four, 1.0) == 4);
  CHECK(choose_k(four, 0.7) == 2);
  CHECK(choose_k(four, 0.4) == 1);
  CHECK(choose_k(four, 0.41) == 2);
  CHECK_ERROR_CODE(choose_k(std::vector<double>{0, 0}, 0.5), ErrorCode::AllZero);
  CHECK_ERROR_CODE(choose_k(std::vector<double>{}, 0.5), ErrorCode::AllZero);
  CHECK_ERROR_CODE(choose_k(four, 0.0), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(choose_k(four, 1.5), ErrorCode::InvalidArgument);
}

TEST_CASE("property: choose_k is monotone in the threshold and bounded by the positive count") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> ev(1 + rng.below(10));
    for (auto& v : ev) v = rng.below(4) == 0 ? 0.0 : rng.uniform() * 10.0;
    std::sort(ev.begin(), ev.end(), std::greater<>());
    if (ev[0] == 0.0) ev[0] = 1.0;
    const auto positive = static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [](double v) { return v > 0; }));
    std::size_t last = 0;
    for (double tau = 0.05; tau <= 1.0 + 1e-12; tau += 0.05) {
      const std::size_t k = choose_k(ev, std::min(tau, 1.0));
      REQUIRE(k >= last);
      REQUIRE(k >= 1);
      REQUIRE(k <= positive);
      last = k;
    }
  }
}

TEST_CASE("property: scaling the data by c scales eigenvalues by c^2 and keeps basis and k") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + rng.below(10), m = 1 + rng.below(6);
    std::vector<std::vector<double>> x, cx;
    for (std::size_t j = 0; j < m; ++j) {
      x.push_back(oracle::random_vector(rng, d));
      cx.push_back(x.back());
      for (auto& v : cx.back()) v *= 3.0;
    }
    const auto a = gram_pca(x, false), b = gram_pca(cx, false);
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (std::size_t i = 0; i < a.eigenvalues.size(); ++i) {
      CHECK(std::abs(b.eigenvalues[i] - 9.0 * a.eigenvalues[i]) <= 1e-8 * 9.0 * a.eigenvalues[i]);
      for (std::size_t c = 0; c < d; ++c) CHECK(b.basis[i][c] == doctest::Approx(a.basis[i][c]).epsilon(1e-9));
    }
    CHECK(choose_k(a.eigenvalues, 0.9) == choose_k(b.eigenvalues, 0.9));
  }
}
