#pragma once

// Executable checks for the linear-algebra facts the ESPRIT error analysis
// rests on: Vandermonde conditioning, the error-matrix split of Toep(g),
// classical perturbation inequalities, the Schur-polynomial form of the
// resolvent contour integrals, and the Gaussian lower-bound construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specest/dense_linalg.hpp"
#include "specest/esprit.hpp"
#include "specest/rng.hpp"
#include "specest/signal_model.hpp"
#include "specest/toeplitz.hpp"

namespace specest {

// ---------------------------------------------------------------------------
// Vandermonde singular values

struct MoitraReport {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double delta = 0.0;        // min pairwise chordal distance
  double upper_bound = 0.0;  // √(n − 1 + 2π/δ)
  double lower_bound = 0.0;  // √(n − 1 − 2π/δ)
  bool upper_ok = false;
  bool lower_ok = false;
  double gram_deviation = 0.0;  // ‖V†V/n − I‖₂
};

inline double min_pairwise_distance(std::span<const cplx> z) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) best = std::min(best, std::abs(z[i] - z[j]));
  return best;
}

/// Singular-value bounds for V_n(z) with unit-modulus nodes. Needs at least
/// two nodes (a single column has σ = √n, outside the bound) and
/// n > 1 + 2π/δ.
inline MoitraReport moitra_bounds_check(std::span<const cplx> z, std::size_t n) {
  if (z.size() < 2) throw Error(Errc::PreconditionViolated, "need at least two nodes");
  for (const auto& x : z)
    if (std::abs(std::abs(x) - 1.0) > 1e-12) throw Error(Errc::PreconditionViolated, "nodes must lie on the unit circle");
  MoitraReport rep;
  rep.delta = min_pairwise_distance(z);
  if (rep.delta == 0.0) throw Error(Errc::PreconditionViolated, "nodes must be distinct");
  const double ratio = 2.0 * std::numbers::pi / rep.delta;
  if (!(static_cast<double>(n) > 1.0 + ratio))
    throw Error(Errc::PreconditionViolated, "n must exceed 1 + 2π/δ");

  const auto v = vandermonde(z, n);
  const auto svd = small_svd(v);
  rep.sigma_max = svd.sigma.front();
  rep.sigma_min = svd.sigma.back();
  rep.upper_bound = std::sqrt(static_cast<double>(n) - 1.0 + ratio);
  rep.lower_bound = std::sqrt(static_cast<double>(n) - 1.0 - ratio);
  rep.upper_ok = rep.sigma_max <= rep.upper_bound;
  rep.lower_ok = rep.sigma_min >= rep.lower_bound;

  auto gram = adjoint_times(v, v);
  gram *= 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  const auto eig = hermitian_eig(gram);
  rep.gram_deviation = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  return rep;
}

// ---------------------------------------------------------------------------
// Error matrices

/// Toep(g) = T_clean + E_tail + E_random for g = clean signal + noise.
struct ErrorDecomposition {
  HermitianToeplitz t_clean;
  HermitianToeplitz e_tail;
  HermitianToeplitz e_random;
  struct Norms {
    double tail = 0.0;    // ‖E_tail‖₂
    double random = 0.0;  // ‖E_random‖₂
    double tail_q = 0.0;  // ‖E_tail Q_r‖₂, Q_r the dominant eigenvectors of T_clean
  } norms;
};

inline ErrorDecomposition error_matrices(const SpectralMeasure& m, std::span<const cplx> noise, std::size_t n) {
  if (n < 1) throw Error(Errc::InvalidRank, "n must be at least 1");
  if (noise.size() != n) throw Error(Errc::LengthMismatch, "noise length differs from n");
  const std::size_t r = m.r(), d = m.d();
  const auto f = m.locations();
  const auto mu = m.intensities();

  CVector clean(n, cplx{}), tail(n, cplx{});
  for (std::size_t i = 0; i < d; ++i) {
    auto& dst = i < r ? clean : tail;
    for (std::size_t j = 0; j < n; ++j)
      dst[j] += mu[i] * unit_phasor(std::fmod(f[i] * static_cast<double>(j), 1.0));
  }
  ErrorDecomposition out{HermitianToeplitz(clean), HermitianToeplitz(tail),
                         HermitianToeplitz(CVector(noise.begin(), noise.end())), {}};

  // E_tail = V_t D V_t†, so its norm is that of the small matrix D½ V_t†V_t D½.
  const auto z = m.nodes();
  const CVector zt(z.begin() + static_cast<std::ptrdiff_t>(r), z.end());
  if (!zt.empty()) {
    const auto vt = vandermonde(zt, n);
    auto g = adjoint_times(vt, vt);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) *= std::sqrt(mu[r + i] * mu[r + j]);
    out.norms.tail = std::max(0.0, hermitian_eig(g).values.front());

    ComplexMatrix q;
    if (r < n) {
      q = top_r_eigs(out.t_clean, r, 1e-12, 100000, 0x7A11ULL).q_r;
    } else {
      q = hermitian_eig(out.t_clean.dense()).vectors;
    }
    ComplexMatrix eq(n, q.cols());
    for (std::size_t c = 0; c < q.cols(); ++c) eq.set_col(c, out.e_tail.apply(q.col(c)));
    out.norms.tail_q = spectral_norm(eq);
  }
  out.norms.random = spectral_norm(out.e_random);

  if (!(out.norms.tail <= static_cast<double>(n) * m.tail_mass() + 1e-8))
    throw std::logic_error("tail error norm exceeds n·μ_tail");
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation inequalities

/// One inequality lhs ≤ rhs evaluated numerically.
struct OracleCheck {
  OracleCheck() = default;
  OracleCheck(std::string name, double lhs, double rhs, double scale)
      : name(std::move(name)), lhs(lhs), rhs(rhs), scale(scale) {}

  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 1.0;  // pass iff lhs ≤ rhs + tol·scale
  bool skipped = false;
  std::string note;

  double slack() const noexcept { return rhs - lhs; }
  bool pass(double tol) const noexcept { return skipped || lhs <= rhs + tol * scale; }
};

inline constexpr double kOracleTolerance = 1e-8;

namespace detail {

inline double hermitian_norm(const ComplexMatrix& h) {
  const auto e = hermitian_eig(h);
  return e.values.empty() ? 0.0 : std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

}  // namespace detail

/// Weyl, Davis–Kahan sin θ and distance-from-angles for Hermitian A and a
/// Hermitian perturbation E, using the dominant r-dimensional eigenspaces.
/// The sin θ and distance checks are marked skipped (GapNonpositive) when
/// λ_r(A) ≤ λ_{r+1}(A+E).
inline std::vector<OracleCheck> perturbation_oracles(const ComplexMatrix& a, const ComplexMatrix& e, std::size_t r) {
  if (!a.is_square() || a.rows() != e.rows() || a.cols() != e.cols())
    throw Error(Errc::ShapeMismatch, "A and E must be square of equal size");
  const std::size_t n = a.rows();
  if (r < 1 || r >= n) throw Error(Errc::InvalidRank, "need 1 <= r < n");
  const auto ea = hermitian_eig(a);
  const auto ep = hermitian_eig(a + e);
  const double norm_e = detail::hermitian_norm(e);
  const double norm_a = std::max(std::abs(ea.values.front()), std::abs(ea.values.back()));
  const double scale = std::max({1.0, norm_a, norm_e});

  std::vector<OracleCheck> out;
  OracleCheck weyl{"weyl", 0.0, norm_e, scale};
  for (std::size_t i = 0; i < n; ++i) weyl.lhs = std::max(weyl.lhs, std::abs(ep.values[i] - ea.values[i]));
  out.push_back(weyl);

  const auto q = ea.vectors.block(0, 0, n, r);
  const auto qhat = ep.vectors.block(0, 0, n, r);
  const double gap = ea.values[r - 1] - ep.values[r];
  const double sin = sin_theta(q, qhat);
  OracleCheck dk{"davis_kahan", sin, 0.0, 1.0};
  if (gap <= 0.0) {
    dk.skipped = true;
    dk.note = std::string(to_string(Errc::GapNonpositive));
  } else {
    dk.rhs = spectral_norm(e * q) / gap;
  }
  out.push_back(dk);

  const auto u = procrustes_align(q, qhat);
  out.push_back({"distance_from_angles", spectral_norm(qhat - q * u), 2.0 * sin, 1.0});
  return out;
}

/// σ²_min(B)λ_i(A) ≤ λ_i(BAB†) ≤ σ²_max(B)λ_i(A) for Hermitian positive
/// definite A (r×r) and full-column-rank B (n×r). lhs/rhs report the worse
/// of the two sides as a single inequality.
inline OracleCheck ostrowski_check(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.is_square() || b.cols() != a.rows() || b.rows() < b.cols())
    throw Error(Errc::ShapeMismatch, "ostrowski_check needs A r×r and B n×r with n >= r");
  const std::size_t r = a.rows();
  const auto la = hermitian_eig(a).values;
  if (la.back() <= 0.0) throw Error(Errc::PreconditionViolated, "A must be positive definite");
  const auto sv = small_svd(b).sigma;
  const double smax2 = sv.front() * sv.front(), smin2 = sv.back() * sv.back();
  const auto lb = hermitian_eig(b * a * b.adjoint()).values;
  OracleCheck c{"ostrowski", -std::numeric_limits<double>::infinity(), 0.0, 1.0};
  for (std::size_t i = 0; i < r; ++i) {
    // Violation amounts; both must be ≤ 0.
    const double below = smin2 * la[i] - lb[i];
    const double above = lb[i] - smax2 * la[i];
    c.lhs = std::max({c.lhs, below, above});
    c.scale = std::max({c.scale, std::abs(lb[i]), smax2 * la[i]});
  }
  return c;
}

/// Bauer–Fike for A = V diag(λ) V⁻¹ perturbed by E: the Hausdorff-type
/// bound κ(V)‖E‖ and the matching-distance bound (2r−1)κ(V)‖E‖.
inline std::vector<OracleCheck> bauer_fike_check(const ComplexMatrix& v, std::span<const cplx> lambda,
                                                 const ComplexMatrix& e) {
  const std::size_t r = lambda.size();
  if (!v.is_square() || v.rows() != r || e.rows() != r || e.cols() != r)
    throw Error(Errc::ShapeMismatch, "bauer_fike_check: inconsistent shapes");
  const auto vinv = pinv_solve(v, ComplexMatrix::identity(r));
  const auto a = v * ComplexMatrix::diagonal(lambda) * vinv;
  const auto lhat = general_eig_small(a + e);
  const double kappa = spectral_norm(v) * spectral_norm(vinv);
  const double bound = kappa * spectral_norm(e);
  double hausdorff = 0.0;
  for (const auto& x : lhat) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& y : lambda) nearest = std::min(nearest, std::abs(x - y));
    hausdorff = std::max(hausdorff, nearest);
  }
  double scale = 1.0;
  for (const auto& y : lambda) scale = std::max(scale, std::abs(y));
  const double md = matching_distance(std::span<const cplx>(lambda), std::span<const cplx>(lhat)).distance;
  return {{"bauer_fike", hausdorff, bound, scale},
          {"bauer_fike_matching", md, (2.0 * static_cast<double>(r) - 1.0) * bound, scale}};
}

/// ‖(A+E)⁺ − A⁺‖₂ ≤ 3‖A⁺‖²‖E‖ / (1 − ‖A⁺‖‖E‖) for full-column-rank A and
/// ‖E‖ < σ_min(A).
inline OracleCheck pinv_perturbation_check(const ComplexMatrix& a, const ComplexMatrix& e) {
  if (a.rows() != e.rows() || a.cols() != e.cols()) throw Error(Errc::ShapeMismatch, "A and E differ in shape");
  const auto ap = pseudoinverse(a);
  const double norm_e = spectral_norm(e);
  const double norm_ap = spectral_norm(ap);
  if (!(norm_e * norm_ap < 1.0)) throw Error(Errc::PreconditionViolated, "need ‖E‖ < σ_min(A)");
  const auto diff = pseudoinverse(a + e) - ap;
  return {"pinv_perturbation", spectral_norm(diff), 3.0 * norm_ap * norm_ap * norm_e / (1.0 - norm_ap * norm_e),
          std::max(1.0, norm_ap)};
}

// ---------------------------------------------------------------------------
// Schur polynomials and contour integrals

inline constexpr double kMaxSchurTerms = 1e7;

/// s_{(m,…,m,0)}(x_1..x_ℓ) = Σ Π x_i^{β_i} over β ∈ {0..m}^ℓ with
/// Σβ = (ℓ−1)m. Instantiated with an integer T and all-ones input it
/// counts the monomials exactly.
template <class T>
T schur_mm0_sum(int m, std::span<const T> x) {
  const std::size_t ell = x.size();
  if (m < 0 || ell < 1) throw Error(Errc::PreconditionViolated, "need m >= 0 and at least one variable");
  if (std::pow(static_cast<double>(m) + 1.0, static_cast<double>(ell)) > kMaxSchurTerms)
    throw Error(Errc::TooLarge, "enumeration exceeds 1e7 compositions");
  if (ell == 1) return T{1};
  const int target = static_cast<int>(ell - 1) * m;

  // Depth-first over β with the remaining budget pruned to what the
  // unassigned coordinates can still absorb.
  std::vector<std::vector<T>> powers(ell, std::vector<T>(static_cast<std::size_t>(m) + 1));
  for (std::size_t i = 0; i < ell; ++i) {
    powers[i][0] = T{1};
    for (int k = 1; k <= m; ++k) powers[i][static_cast<std::size_t>(k)] = powers[i][static_cast<std::size_t>(k - 1)] * x[i];
  }
  T total{0};
  auto rec = [&](auto&& self, std::size_t i, int budget, T prod) -> void {
    if (i + 1 == ell) {
      if (budget <= m) total += prod * powers[i][static_cast<std::size_t>(budget)];
      return;
    }
    const int rest = static_cast<int>(ell - i - 1) * m;
    for (int b = std::max(0, budget - rest); b <= std::min(m, budget); ++b)
      self(self, i + 1, budget - b, prod * powers[i][static_cast<std::size_t>(b)]);
  };
  rec(rec, 0, target, T{1});
  return total;
}

inline double schur_mm0(int m, std::size_t ell, std::span<const double> x) {
  if (x.size() != ell) throw Error(Errc::LengthMismatch, "x must have ell entries");
  return schur_mm0_sum<double>(m, x);
}

/// Number of monomials of s_{(m,…,m,0)} in ℓ variables, counted exactly.
inline std::uint64_t schur_mm0_coefficient_sum(int m, std::size_t ell) {
  const std::vector<std::uint64_t> ones(ell, 1);
  return schur_mm0_sum<std::uint64_t>(m, std::span<const std::uint64_t>(ones));
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

enum class ContourMode { residue, schur };

/// A_m(λ) = (1/2πi)∮ dζ / (Π(ζ − λ_j) ζ^{m+1}) over a contour enclosing the
/// λ's but not 0. `residue` sums the simple-pole residues
/// Σ_j λ_j^{−(m+1)} Π_{p≠j} 1/(λ_j − λ_p); `schur` evaluates
/// (−1)^{ℓ−1} s_{(m,…,m,0)}(λ) / Π λ_j^{m+1}.
inline double contour_A(int m, std::span<const double> lambdas, ContourMode mode = ContourMode::residue) {
  const std::size_t ell = lambdas.size();
  if (m < -1 || ell < 1) throw Error(Errc::PreconditionViolated, "need m >= -1 and at least one eigenvalue");
  double largest = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw Error(Errc::PreconditionViolated, "eigenvalues must be positive");
    largest = std::max(largest, l);
  }
  for (std::size_t i = 0; i < ell; ++i)
    for (std::size_t j = i + 1; j < ell; ++j)
      if (std::abs(lambdas[i] - lambdas[j]) < 1e-6 * largest)
        throw Error(Errc::NearCoincident, "eigenvalues closer than 1e-6 relative");

  const double p = static_cast<double>(m + 1);
  if (mode == ContourMode::residue) {
    double sum = 0.0;
    for (std::size_t j = 0; j < ell; ++j) {
      double term = std::pow(lambdas[j], -p);
      for (std::size_t q = 0; q < ell; ++q)
        if (q != j) term /= lambdas[j] - lambdas[q];
      sum += term;
    }
    return sum;
  }
  double s;
  if (m == -1) {
    s = ell == 1 ? 1.0 : 0.0;  // (−1, …, −1, 0) shifted to exponent 0
  } else {
    s = schur_mm0(m, ell, lambdas);
  }
  double denom = 1.0;
  for (double l : lambdas) denom *= std::pow(l, p);
  return ((ell - 1) % 2 == 0 ? 1.0 : -1.0) * s / denom;
}

// ---------------------------------------------------------------------------
// Lower-bound construction

struct TvReport {
  double sum = 0.0;       // Σ_{j=1..n} 4 sin²(jε) = ‖g − g′‖²
  double tv_bound = 0.0;  // √sum, bounds the TV distance of the two Gaussians
  double ratio = 0.0;     // sum / (n³ε²)
};

inline TvReport tv_lower_bound_demo(std::size_t n, double eps) {
  if (n < 1 || !(eps > 0.0 && std::isfinite(eps))) throw Error(Errc::PreconditionViolated, "need n >= 1 and eps > 0");
  TvReport rep;
  for (std::size_t j = 1; j <= n; ++j) {
    const double s = std::sin(static_cast<double>(j) * eps);
    rep.sum += 4.0 * s * s;
  }
  rep.tv_bound = std::sqrt(rep.sum);
  const double nd = static_cast<double>(n);
  rep.ratio = rep.sum / (nd * nd * nd * eps * eps);
  return rep;
}

}  // namespace specest
