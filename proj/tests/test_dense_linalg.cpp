#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "specest/dense_linalg.hpp"

using namespace specest;

namespace {

ComplexMatrix random_matrix(std::size_t m, std::size_t n, Rng& rng) {
  ComplexMatrix a(m, n);
  for (auto& x : a.data()) x = {rng.normal(), rng.normal()};
  return a;
}

ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  auto a = random_matrix(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

ComplexMatrix random_orthonormal(std::size_t n, std::size_t r, Rng& rng) {
  return hermitian_eig(random_hermitian(n, rng)).vectors.block(0, 0, n, r);
}

void expect_valid_eig(const ComplexMatrix& h, const EigenDecomposition& e) {
  const std::size_t n = h.rows();
  ASSERT_EQ(e.values.size(), n);
  for (std::size_t i = 1; i < n; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);
  EXPECT_LE(orthonormality_defect(e.vectors), 1e-10 * static_cast<double>(n));
  auto lhs = h * e.vectors;
  auto rhs = e.vectors * ComplexMatrix::diagonal(std::span<const double>(e.values));
  EXPECT_LE((lhs - rhs).frobenius_norm(), 1e-8 * std::max(h.frobenius_norm(), 1e-300));
}

// Eigenvalues of a 2×2 or 3×3 matrix from the characteristic polynomial.
CVector char_poly_roots(const ComplexMatrix& a) {
  if (a.rows() == 1) return {a(0, 0)};
  if (a.rows() == 2) {
    const cplx tr = a(0, 0) + a(1, 1), det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const cplx disc = std::sqrt(tr * tr - 4.0 * det);
    return {(tr + disc) / 2.0, (tr - disc) / 2.0};
  }
  // λ³ + c2 λ² + c1 λ + c0 via Cardano on the depressed cubic.
  const cplx c2 = -(a(0, 0) + a(1, 1) + a(2, 2));
  const cplx c1 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
                  a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  const cplx c0 = -(a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                    a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                    a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)));
  const cplx p = c1 - c2 * c2 / 3.0;
  const cplx q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  cplx u = std::pow(-q / 2.0 + disc, 1.0 / 3.0);
  if (std::abs(u) < 1e-14) u = std::pow(-q / 2.0 - disc, 1.0 / 3.0);
  const cplx omega{-0.5, std::sqrt(3.0) / 2.0};
  CVector roots;
  for (int k = 0; k < 3; ++k) {
    const cplx uk = u * std::pow(omega, k);
    const cplx vk = std::abs(uk) > 1e-300 ? -p / (3.0 * uk) : cplx{};
    roots.push_back(uk + vk - c2 / 3.0);
  }
  return roots;
}

double multiset_distance(CVector a, CVector b) {
  double worst = 0.0;
  for (const auto& x : a) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < b.size(); ++j)
      if (std::abs(x - b[j]) < std::abs(x - b[best])) best = j;
    worst = std::max(worst, std::abs(x - b[best]));
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return worst;
}

}  // namespace

TEST(HermitianEig, Identity) {
  auto e = hermitian_eig(ComplexMatrix::identity(3));
  for (double v : e.values) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_LE(orthonormality_defect(e.vectors), 1e-14);
}

TEST(HermitianEig, DiagonalIsSortedDescending) {
  const double d[] = {3.0, 1.0, 2.0};
  auto h = ComplexMatrix::diagonal(std::span<const double>(d));
  auto e = hermitian_eig(h);
  EXPECT_NEAR(e.values[0], 3.0, 1e-15);
  EXPECT_NEAR(e.values[1], 2.0, 1e-15);
  EXPECT_NEAR(e.values[2], 1.0, 1e-15);
  // Columns are (up to phase) e_0, e_2, e_1.
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(1, 2)), 1.0, 1e-14);
}

TEST(HermitianEig, TwoByTwoSwap) {
  ComplexMatrix h{{0.0, 1.0}, {1.0, 0.0}};
  auto e = hermitian_eig(h);
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], -1.0, 1e-15);
  const double s = 1.0 / std::sqrt(2.0);
  // (1, 1)/√2 and (1, −1)/√2 up to phase.
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), s, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0) - e.vectors(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1) + e.vectors(1, 1)), 0.0, 1e-14);
}

TEST(HermitianEig, NotSquare) {
  EXPECT_THROW(hermitian_eig(ComplexMatrix(2, 3)), Error);
}

TEST(HermitianEig, RandomInvariants) {
  Rng rng(1);
  for (std::size_t n : {1, 2, 3, 5, 8, 17, 40, 64}) {
    const auto h = random_hermitian(n, rng);
    const auto e = hermitian_eig(h);
    expect_valid_eig(h, e);
    double trace = 0.0, sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += h(i, i).real();
    for (double v : e.values) {
      sum += v;
      sumsq += v * v;
    }
    EXPECT_NEAR(sum, trace, 1e-8 * std::max(1.0, std::abs(trace)) + 1e-10 * h.frobenius_norm());
    EXPECT_NEAR(sumsq, std::pow(h.frobenius_norm(), 2), 1e-8 * std::pow(h.frobenius_norm(), 2));
  }
}

TEST(HermitianEig, RepeatedAndZeroEigenvalues) {
  Rng rng(2);
  const auto q = random_orthonormal(12, 12, rng);
  std::vector<double> d{5, 5, 5, 0, 0, 0, 0, -1, -1, 2, 2, 2};
  const auto h = q * ComplexMatrix::diagonal(std::span<const double>(d)) * q.adjoint();
  const auto e = hermitian_eig(h);
  expect_valid_eig(h, e);
  std::sort(d.rbegin(), d.rend());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(e.values[i], d[i], 1e-12);
}

TEST(GeneralEig, Examples) {
  ComplexMatrix a{{2.0, 0.0}, {0.0, cplx(0, 3)}};
  EXPECT_LE(multiset_distance(general_eig_small(a), {2.0, cplx(0, 3)}), 1e-14);
  ComplexMatrix nil{{0.0, 1.0}, {0.0, 0.0}};
  EXPECT_LE(multiset_distance(general_eig_small(nil), {0.0, 0.0}), 1e-14);
  ComplexMatrix rot{{0.0, -1.0}, {1.0, 0.0}};
  EXPECT_LE(multiset_distance(general_eig_small(rot), {cplx(0, 1), cplx(0, -1)}), 1e-14);
}

TEST(GeneralEig, MatchesCharacteristicPolynomial) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const auto a = random_matrix(n, n, rng);
    const auto got = general_eig_small(a);
    EXPECT_LE(multiset_distance(got, char_poly_roots(a)), 1e-8 * std::max(1.0, a.max_abs())) << "n=" << n;
  }
}

TEST(GeneralEig, BackwardError) {
  Rng rng(4);
  for (std::size_t n : {4, 7, 16, 33, 64}) {
    const auto a = random_matrix(n, n, rng);
    const double na = spectral_norm(a);
    for (const auto& lambda : general_eig_small(a)) {
      auto shifted = a;
      for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda;
      // ‖Av − λv‖ for the best unit v is σ_min(A − λI).
      EXPECT_LE(small_svd(shifted).sigma.back(), 1e-8 * na);
    }
  }
  EXPECT_THROW(general_eig_small(ComplexMatrix(65, 65)), Error);
}

TEST(SmallSvd, Examples) {
  auto zero = small_svd(ComplexMatrix(3, 2));
  for (double s : zero.sigma) EXPECT_EQ(s, 0.0);
  EXPECT_LE(orthonormality_defect(zero.u), 1e-14);

  auto neg = small_svd(ComplexMatrix{{-2.0}});
  EXPECT_NEAR(neg.sigma[0], 2.0, 1e-15);
  EXPECT_NEAR(std::abs(neg.u(0, 0) * neg.sigma[0] * std::conj(neg.v(0, 0)) - cplx(-2.0)), 0.0, 1e-15);

  auto r1 = small_svd(ComplexMatrix{{1.0, 1.0}, {0.0, 0.0}});
  EXPECT_NEAR(r1.sigma[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r1.sigma[1], 0.0, 1e-15);
}

TEST(SmallSvd, RandomReconstruction) {
  Rng rng(5);
  for (auto [m, n] : {std::pair{5, 3}, {3, 5}, {40, 4}, {8, 8}, {1, 6}, {64, 64}}) {
    const auto a = random_matrix(m, n, rng);
    const auto s = small_svd(a);
    for (std::size_t i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma[i - 1], s.sigma[i]);
    EXPECT_LE(orthonormality_defect(s.u), 1e-12);
    EXPECT_LE(orthonormality_defect(s.v), 1e-12);
    auto recon = s.u * ComplexMatrix::diagonal(std::span<const double>(s.sigma)) * s.v.adjoint();
    EXPECT_LE((recon - a).frobenius_norm(), 1e-8 * a.frobenius_norm());
  }
}

TEST(PinvSolve, Examples) {
  Rng rng(6);
  const auto b = random_matrix(3, 2, rng);
  EXPECT_LE((pinv_solve(ComplexMatrix::identity(3), b) - b).max_abs(), 1e-14);

  ComplexMatrix a{{1.0}, {1.0}};
  ComplexMatrix rhs{{0.0}, {2.0}};
  EXPECT_NEAR(std::abs(pinv_solve(a, rhs)(0, 0) - 1.0), 0.0, 1e-15);

  const auto q = random_orthonormal(6, 3, rng);
  EXPECT_LE((pseudoinverse(q) - q.adjoint()).max_abs(), 1e-12);
}

TEST(PinvSolve, RankDeficient) {
  ComplexMatrix a{{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}};
  try {
    pinv_solve(a, ComplexMatrix(3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDeficient);
  }
  EXPECT_THROW(pinv_solve(ComplexMatrix(2, 3), ComplexMatrix(2, 1)), Error);
}

TEST(PinvSolve, NormalEquationsAndPenroseIdentities) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 19, k = 1 + rng.next_u64() % n;
    const auto a = random_matrix(n, k, rng);
    const auto b = random_matrix(n, 2, rng);
    const auto x = pinv_solve(a, b);
    const double na = spectral_norm(a);
    EXPECT_LE(adjoint_times(a, a * x - b).max_abs(), 1e-8 * na * spectral_norm(b));

    const auto p = pseudoinverse(a);
    const double tol = 1e-8 * na;
    EXPECT_LE((a * p * a - a).max_abs(), tol);
    EXPECT_LE((p * a * p - p).max_abs(), 1e-8 * spectral_norm(p));
    EXPECT_LE(hermitian_defect(a * p), tol);
    EXPECT_LE(hermitian_defect(p * a), tol);
  }
}

TEST(PinvSolve, ReverseOrderLaw) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 4 + trial % 5, k = 2 + trial % 2;
    const auto a = random_matrix(m, k, rng);  // full column rank
    const auto b = random_matrix(k, k, rng);  // square, full row rank
    const auto lhs = pseudoinverse(a * b);
    // B⁺ for a full-row-rank B is (B†)⁺†.
    const auto bp = pseudoinverse(b.adjoint()).adjoint();
    const auto rhs = bp * pseudoinverse(a);
    EXPECT_LE((lhs - rhs).max_abs(), 1e-8 * std::max(1.0, spectral_norm(lhs)));
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(ComplexMatrix::identity(5)), 1.0, 1e-12);
  const double d[] = {1.0, -5.0, 2.0};
  EXPECT_NEAR(spectral_norm(ComplexMatrix::diagonal(std::span<const double>(d))), 5.0, 1e-9);
  CVector u{2.0, 0.0, 0.0}, v{0.0, cplx(0, 3), 0.0};
  const auto uv = ComplexMatrix::column(u) * ComplexMatrix::column(v).adjoint();
  EXPECT_NEAR(spectral_norm(uv), 6.0, 1e-12);
  EXPECT_EQ(spectral_norm(ComplexMatrix(3, 3)), 0.0);
}

TEST(SpectralNorm, AdjointAndSubmultiplicativity) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_matrix(6, 4, rng);
    const auto b = random_matrix(4, 5, rng);
    const double na = spectral_norm(a);
    EXPECT_NEAR(na, spectral_norm(a.adjoint()), 1e-6 * na);
    EXPECT_LE(spectral_norm(a * b), na * spectral_norm(b) + 1e-6);
    EXPECT_NEAR(na, small_svd(a).sigma[0], 1e-6 * na);
  }
}

TEST(SinTheta, Examples) {
  Rng rng(10);
  const auto u = random_orthonormal(6, 2, rng);
  EXPECT_NEAR(sin_theta(u, u), 0.0, 1e-12);

  ComplexMatrix e1{{1.0}, {0.0}}, e2{{0.0}, {1.0}};
  EXPECT_NEAR(sin_theta(e1, e2), 1.0, 1e-15);

  const double th = std::numbers::pi / 6;
  ComplexMatrix v{{std::cos(th)}, {std::sin(th)}};
  EXPECT_NEAR(sin_theta(e1, v), 0.5, 1e-14);
}

TEST(SinTheta, Errors) {
  ComplexMatrix e1{{1.0}, {0.0}};
  ComplexMatrix bad{{2.0}, {0.0}};
  try {
    sin_theta(e1, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotOrthonormal);
  }
  try {
    sin_theta(e1, ComplexMatrix(3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
}

TEST(SinTheta, MatchesFullProjectorDifference) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_orthonormal(7, 3, rng);
    const auto v = random_orthonormal(7, 3, rng);
    const auto diff = u * u.adjoint() - v * v.adjoint();
    double brute = 0.0;
    for (double x : hermitian_eig(diff).values) brute = std::max(brute, std::abs(x));
    EXPECT_NEAR(sin_theta(u, v), brute, 1e-12);
  }
}

TEST(Procrustes, Examples) {
  Rng rng(12);
  const auto q = random_orthonormal(8, 3, rng);
  EXPECT_LE((procrustes_align(q, q) - ComplexMatrix::identity(3)).max_abs(), 1e-12);

  const CVector phases{std::polar(1.0, 0.3), std::polar(1.0, -1.2), std::polar(1.0, 2.5)};
  const auto d = ComplexMatrix::diagonal(std::span<const cplx>(phases));
  const auto u = procrustes_align(q, q * d);
  EXPECT_LE((u - d).max_abs(), 1e-12);
  EXPECT_LE((q * d - q * u).max_abs(), 1e-12);
}

TEST(Procrustes, DistanceFromAnglesBound) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_orthonormal(8, 2, rng);
    // Mix of random pairs and small perturbations of q.
    ComplexMatrix qhat;
    if (trial % 2 == 0) {
      qhat = random_orthonormal(8, 2, rng);
    } else {
      const auto p = q + 0.05 * ComplexMatrix(random_matrix(8, 2, rng));
      qhat = small_svd(p).u;
    }
    const auto u = procrustes_align(q, qhat);
    EXPECT_LE(orthonormality_defect(u), 1e-12);
    EXPECT_LE(spectral_norm(qhat - q * u), 2.0 * sin_theta(q, qhat) + 1e-10);
  }
  EXPECT_THROW(procrustes_align(ComplexMatrix(4, 2), ComplexMatrix(4, 3)), Error);
}
