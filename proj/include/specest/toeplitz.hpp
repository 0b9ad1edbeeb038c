#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "specest/dense_linalg.hpp"
#include "specest/error.hpp"
#include "specest/matrix.hpp"
#include "specest/rng.hpp"

namespace specest {

/// Iterative radix-2 FFT plan with precomputed twiddles and bit reversal.
class FftPlan {
 public:
  explicit FftPlan(std::size_t m) : m_(m) {
    if (m == 0 || !std::has_single_bit(m)) throw Error(Errc::NotPowerOfTwo, "FFT length must be a power of two");
    twiddle_.resize(m / 2);
    for (std::size_t k = 0; k < m / 2; ++k) {
      const double t = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      twiddle_[k] = {std::cos(t), std::sin(t)};
    }
    const int bits = std::countr_zero(m);
    reversed_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const noexcept { return m_; }

  /// Unnormalized forward DFT: X_k = Σ x_j e^{-2πijk/m}.
  void forward(std::span<cplx> x) const { transform(x, false); }
  /// Inverse DFT including the 1/m factor.
  void inverse(std::span<cplx> x) const {
    transform(x, true);
    const double s = 1.0 / static_cast<double>(m_);
    for (auto& v : x) v *= s;
  }

 private:
  void transform(std::span<cplx> x, bool inverse) const {
    if (x.size() != m_) throw Error(Errc::LengthMismatch, "FFT input length differs from plan");
    for (std::size_t i = 0; i < m_; ++i)
      if (i < reversed_[i]) std::swap(x[i], x[reversed_[i]]);
    for (std::size_t len = 2; len <= m_; len <<= 1) {
      const std::size_t half = len / 2, stride = m_ / len;
      for (std::size_t start = 0; start < m_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          cplx w = twiddle_[k * stride];
          if (inverse) w = std::conj(w);
          const cplx t = detail::mul(w, x[start + k + half]);
          x[start + k + half] = x[start + k] - t;
          x[start + k] += t;
        }
      }
    }
  }

  std::size_t m_;
  CVector twiddle_;
  std::vector<std::size_t> reversed_;
};

inline CVector fft(CVector x) {
  FftPlan(x.size()).forward(x);
  return x;
}

inline CVector ifft(CVector x) {
  FftPlan(x.size()).inverse(x);
  return x;
}

/// n×n Hermitian Toeplitz matrix stored by its first column t:
/// T(i,j) = t[i−j] for i ≥ j and conj(t[j−i]) for i < j; t[0] is real.
///
/// Products use a circulant embedding of size m = smallest power of two
/// ≥ 2n. The circulant's first column c (length m) is laid out as
///   c[k]     = t[k]         for k = 0..n−1   (lower diagonals)
///   c[k]     = 0            for k = n..m−n
///   c[m − k] = conj(t[k])   for k = 1..n−1   (upper diagonals)
/// so that C(i,j) = c[(i − j) mod m] reproduces T in its leading n×n block,
/// and T·x is the first n entries of ifft(fft(c) ⊙ fft([x; 0])).
class HermitianToeplitz {
 public:
  explicit HermitianToeplitz(CVector first_col) : t_(std::move(first_col)) {
    if (t_.empty()) throw Error(Errc::LengthMismatch, "Toeplitz matrix needs n >= 1");
    t_[0] = {t_[0].real(), 0.0};
    std::size_t m = 2;
    while (m < 2 * t_.size()) m <<= 1;
    plan_ = std::make_shared<const FftPlan>(m);
    CVector c(m, cplx{});
    for (std::size_t k = 0; k < t_.size(); ++k) c[k] = t_[k];
    for (std::size_t k = 1; k < t_.size(); ++k) c[m - k] = std::conj(t_[k]);
    plan_->forward(c);
    spectrum_ = std::make_shared<const CVector>(std::move(c));
  }

  std::size_t n() const noexcept { return t_.size(); }
  std::span<const cplx> first_col() const noexcept { return t_; }
  std::size_t embedding_size() const noexcept { return plan_->size(); }

  cplx operator()(std::size_t i, std::size_t j) const noexcept { return i >= j ? t_[i - j] : std::conj(t_[j - i]); }

  ComplexMatrix dense() const {
    ComplexMatrix a(n(), n());
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) a(i, j) = (*this)(i, j);
    return a;
  }

  /// T·x in O(m log m).
  CVector apply(std::span<const cplx> x) const {
    if (x.size() != n()) throw Error(Errc::LengthMismatch, "Toeplitz matvec: vector length differs from n");
    CVector buf(plan_->size(), cplx{});
    std::copy(x.begin(), x.end(), buf.begin());
    plan_->forward(buf);
    const auto& s = *spectrum_;
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = detail::mul(buf[k], s[k]);
    plan_->inverse(buf);
    buf.resize(n());
    return buf;
  }

  /// Largest absolute row sum (‖T‖_∞ = ‖T‖₁), an upper bound on ‖T‖₂.
  double max_row_sum() const noexcept {
    const std::size_t n = t_.size();
    std::vector<double> prefix(n, 0.0);  // prefix[k] = Σ_{1≤j≤k} |t_j|
    for (std::size_t k = 1; k < n; ++k) prefix[k] = prefix[k - 1] + std::abs(t_[k]);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      best = std::max(best, std::abs(t_[0]) + prefix[i] + prefix[n - 1 - i]);
    return best;
  }

  double frobenius_norm() const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < t_.size(); ++k) s += (k == 0 ? 1.0 : 2.0) * static_cast<double>(t_.size() - k) * std::norm(t_[k]);
    return std::sqrt(s);
  }

 private:
  CVector t_;
  std::shared_ptr<const FftPlan> plan_;
  std::shared_ptr<const CVector> spectrum_;
};

inline CVector toeplitz_matvec(const HermitianToeplitz& t, std::span<const cplx> x) { return t.apply(x); }

/// ‖T‖₂ = max |λ| by power iteration on T with FFT products.
inline double spectral_norm(const HermitianToeplitz& t, int max_iter = 2000, double rel_tol = 1e-9) {
  const std::size_t n = t.n();
  Rng rng(0x70E9ULL);
  CVector v(n);
  for (auto& x : v) x = {rng.normal(), rng.normal()};
  double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  for (auto& x : v) x /= nv;
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    // Two applications per step so that ±λ pairs do not make the iterate oscillate.
    const CVector w = t.apply(v);
    CVector y = t.apply(w);
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    const double next = std::sqrt(ny);
    for (auto& x : y) x /= ny;
    v = std::move(y);
    if (it > 3 && std::abs(next - est) <= rel_tol * next) return next;
    est = next;
  }
  return est;
}

namespace detail {

// Modified Gram–Schmidt with one reorthogonalization pass. Columns that
// collapse are replaced by fresh random directions.
inline void orthonormalize(std::vector<CVector>& block, Rng& rng) {
  for (std::size_t j = 0; j < block.size(); ++j) {
    auto& x = block[j];
    const double before = norm2(x);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < j; ++i) axpy(-dot(block[i], x), block[i], x);
    double nx = norm2(x);
    int retries = 0;
    while (!(nx > 1e-10 * before) || nx == 0.0) {
      if (++retries > 8) throw Error(Errc::ConvergenceFailure, "could not orthonormalize block");
      for (auto& e : x) e = {rng.normal(), rng.normal()};
      const double fresh = norm2(x);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < j; ++i) axpy(-dot(block[i], x), block[i], x);
      nx = norm2(x);
      if (nx > 1e-10 * fresh) break;
    }
    for (auto& e : x) e /= nx;
  }
}

}  // namespace detail

/// Dominant r eigenpairs (largest algebraic eigenvalues) of a Hermitian
/// Toeplitz matrix by subspace iteration on T + cI, c = max row sum. The
/// shift makes the operator positive semidefinite, so the wanted eigenvalues
/// are also the largest in magnitude even when noise pushes the lower end of
/// the spectrum far below zero. Block size r+2, Rayleigh–Ritz every step,
/// converged when every wanted Ritz residual is ≤ tol·max|θ|.
inline SubspaceDecomposition top_r_eigs(const HermitianToeplitz& t, std::size_t r, double tol = 1e-12,
                                        std::size_t max_iter = 20000, std::uint64_t seed = 0) {
  const std::size_t n = t.n();
  if (r < 1 || r >= n) throw Error(Errc::InvalidRank, "top_r_eigs needs 1 <= r < n");
  if (!(tol > 0.0)) throw Error(Errc::InvalidRank, "tolerance must be positive");
  const std::size_t p = std::min(r + 2, n);
  const double shift = t.max_row_sum();

  Rng rng(seed);
  std::vector<CVector> x(p, CVector(n));
  for (auto& col : x)
    for (auto& e : col) e = {rng.normal(), rng.normal()};
  detail::orthonormalize(x, rng);

  std::vector<CVector> y(p);
  ComplexMatrix h(p, p);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < p; ++j) y[j] = t.apply(x[j]);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) {
        h(i, j) = dot(x[i], y[j]);
        h(j, i) = std::conj(h(i, j));
      }
    const auto ritz = hermitian_eig(h);
    // Rotate the block onto the Ritz vectors, carrying T·X along.
    std::vector<CVector> xr(p, CVector(n, cplx{})), yr(p, CVector(n, cplx{}));
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i < p; ++i) {
        const cplx s = ritz.vectors(i, j);
        axpy(s, x[i], xr[j]);
        axpy(s, y[i], yr[j]);
      }

    double scale = 0.0;
    for (double v : ritz.values) scale = std::max(scale, std::abs(v));
    bool done = scale > 0.0;
    for (std::size_t j = 0; j < r && done; ++j) {
      double res = 0.0;
      for (std::size_t k = 0; k < n; ++k) res += std::norm(yr[j][k] - ritz.values[j] * xr[j][k]);
      done = std::sqrt(res) <= tol * scale;
    }
    if (scale == 0.0 && shift == 0.0) throw Error(Errc::ConvergenceFailure, "zero operator has no dominant subspace");
    if (done) {
      SubspaceDecomposition out;
      out.r = r;
      out.iterations = it;
      out.values.assign(ritz.values.begin(), ritz.values.begin() + static_cast<std::ptrdiff_t>(r));
      out.q_r = ComplexMatrix(n, r);
      for (std::size_t j = 0; j < r; ++j) out.q_r.set_col(j, xr[j]);
      return out;
    }
    for (std::size_t j = 0; j < p; ++j) {
      x[j] = std::move(yr[j]);
      axpy(shift, xr[j], x[j]);
    }
    detail::orthonormalize(x, rng);
  }
  throw Error(Errc::ConvergenceFailure, "subspace iteration hit the iteration cap");
}

}  // namespace specest
