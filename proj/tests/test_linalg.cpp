#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "acdisc/linalg.hpp"

using namespace acdisc;

TEST_CASE("matrix product and identity") {
  Mat I = Mat::identity(3);
  Mat A(3, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = u(rng);
  Mat B = A * I;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(B(i, j) == A(i, j));
}

TEST_CASE("inverse solves to machine precision") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    int n = 2 + trial;
    Mat A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
      A(i, i) += 3.0;  // keep it comfortably nonsingular
    }
    Mat Ainv = inverse(A);
    REQUIRE(op_norm(A * Ainv - Mat::identity(n)) < 1e-12);
    REQUIRE(op_norm(Ainv * A - Mat::identity(n)) < 1e-12);
  }
}

TEST_CASE("inverse rejects singular input") {
  Mat A(2, 2);
  A(0, 0) = 1;
  A(0, 1) = 2;
  A(1, 0) = 2;
  A(1, 1) = 4;
  REQUIRE_THROWS_AS(inverse(A), Error);
}

TEST_CASE("symmetric eigenvalues on a known matrix") {
  // eigenvalues of [[2,1],[1,2]] are 1 and 3
  Mat A(2, 2);
  A(0, 0) = 2;
  A(0, 1) = 1;
  A(1, 0) = 1;
  A(1, 1) = 2;
  auto e = sym_eigen(A);
  REQUIRE(e.values.front() == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(e.values.back() == Catch::Approx(3.0).epsilon(1e-12));
  REQUIRE(min_eigenvalue(A) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(max_eigenvalue(A) == Catch::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("eigenvectors reconstruct the matrix") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  int n = 4;
  Mat S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S(i, j) = u(rng);
      S(j, i) = S(i, j);
    }
  auto e = sym_eigen(S);
  Mat R(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) += e.values[k] * e.vectors(i, k) * e.vectors(j, k);
  REQUIRE(op_norm(R - S) < 1e-10);
}

TEST_CASE("operator norm agrees with a power-iteration estimate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Mat A(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = u(rng);
  Vec x{1, 0.3, -0.2};
  for (int it = 0; it < 500; ++it) {
    Vec y = A * x;
    Vec z(3);
    // apply A^T
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) z[j] += A(i, j) * y[i];
    double nz = norm2(z);
    REQUIRE(nz > 0);
    for (auto& c : z) c /= nz;
    x = z;
  }
  // with ||x|| = 1 converged, ||Ax|| is the top singular value
  double top = norm2(A * x);
  REQUIRE(op_norm(A) == Catch::Approx(top).epsilon(1e-6));
}

TEST_CASE("complex matrix inverse round trip") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  int n = 3;
  CMat A(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = std::complex<double>(u(rng), u(rng)) + (i == j ? 4.0 : 0.0);
  CMat Ai = inverse(A);
  CMat P = A * Ai;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      REQUIRE(std::abs(P(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("real embedding matches complex action") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  int n = 2;
  std::vector<std::complex<double>> entries(n * n);
  for (auto& e : entries) e = {u(rng), u(rng)};
  Mat E = real_embedding(n, entries);
  CVec z{{u(rng), u(rng)}, {u(rng), u(rng)}};
  // complex product
  CVec w(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[i] += entries[i * n + j] * z[j];
  Vec zr{z[0].real(), z[1].real(), z[0].imag(), z[1].imag()};
  Vec wr = E * zr;
  for (int i = 0; i < n; ++i) {
    REQUIRE(wr[i] == Catch::Approx(w[i].real()).margin(1e-14));
    REQUIRE(wr[n + i] == Catch::Approx(w[i].imag()).margin(1e-14));
  }
}

TEST_CASE("min singular value of an orthogonal-ish matrix") {
  Mat R(2, 2);
  double c = std::cos(0.7), s = std::sin(0.7);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  REQUIRE(min_singular_value(R) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(op_norm(R) == Catch::Approx(1.0).epsilon(1e-12));
}
