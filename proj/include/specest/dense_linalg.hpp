#pragma once

// Reference dense complex linear algebra: Hermitian eigendecomposition,
// small non-Hermitian eigenvalues, thin SVD, least squares through the
// pseudoinverse, spectral norm and subspace distances. Everything here is
// O(n^3) and dependency-free; the structured fast path in toeplitz.hpp is
// checked against it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "specest/error.hpp"
#include "specest/matrix.hpp"
#include "specest/rng.hpp"

namespace specest {

/// Eigenvalues in descending algebraic order, orthonormal eigenvector columns.
struct EigenDecomposition {
  std::vector<double> values;
  ComplexMatrix vectors;
};

/// Top-r block of an eigendecomposition.
struct SubspaceDecomposition {
  std::size_t r = 0;
  std::vector<double> values;
  ComplexMatrix q_r;
  std::size_t iterations = 0;
};

struct SvdResult {
  ComplexMatrix u;            // m x k
  std::vector<double> sigma;  // k, descending
  ComplexMatrix v;            // n x k
};

namespace detail {

// Implicit QL on a real symmetric tridiagonal matrix. `diag` (length n) and
// `off` (off[i] couples i and i+1, off[n-1] = 0) are overwritten; on return
// diag holds the eigenvalues and rows of `zt` the matching eigenvectors
// (zt enters as the row-major transpose of the accumulated basis).
inline void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& off, std::vector<double>& zt,
                           std::size_t n) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 60;
  double shift_sum = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(diag[l]) + std::abs(off[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(off[m]) > eps * tst1) ++m;
    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxSweeps) throw Error(Errc::ConvergenceFailure, "tridiagonal QL did not converge");
        double g = diag[l];
        double p = (diag[l + 1] - g) / (2.0 * off[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        diag[l] = off[l] / (p + r);
        diag[l + 1] = off[l] * (p + r);
        const double dl1 = diag[l + 1];
        double h = g - diag[l];
        for (std::size_t i = l + 2; i < n; ++i) diag[i] -= h;
        shift_sum += h;

        p = diag[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = off[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * off[ii];
          h = c * p;
          r = std::hypot(p, off[ii]);
          off[ii + 1] = s * r;
          s = off[ii] / r;
          c = p / r;
          p = c * diag[ii] - s * g;
          diag[ii + 1] = h + s * (c * g + s * diag[ii]);
          double* zi = zt.data() + ii * n;
          double* zi1 = zi + n;
          for (std::size_t k = 0; k < n; ++k) {
            const double t = zi1[k];
            zi1[k] = s * zi[k] + c * t;
            zi[k] = c * zi[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * off[l] / dl1;
        off[l] = s * p;
        diag[l] = c * p;
      } while (std::abs(off[l]) > eps * tst1);
    }
    diag[l] += shift_sum;
    off[l] = 0.0;
  }
}

// Unit-norm Householder data: H = I - gamma u u†, Hermitian and unitary,
// mapping x to -phase(x_0)·‖x‖·e_0.
struct Reflector {
  CVector u;
  double gamma = 0.0;
  cplx image{};  // H x restricted to its first entry
};

inline Reflector make_reflector(std::span<const cplx> x) {
  Reflector h;
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += std::norm(x[i]);
  if (tail == 0.0) {
    h.image = x.empty() ? cplx{} : x[0];
    return h;
  }
  const double ax0 = std::abs(x[0]);
  const double s = std::sqrt(tail + ax0 * ax0);
  const cplx phase = ax0 > 0.0 ? x[0] / ax0 : cplx{1.0, 0.0};
  h.u.assign(x.begin(), x.end());
  h.u[0] += phase * s;
  h.gamma = 1.0 / (s * (s + ax0));
  h.image = -phase * s;
  return h;
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix: Householder reduction to
/// tridiagonal form, diagonal phase scaling to a real tridiagonal, implicit QL.
/// The input is Hermitianized as (H + H†)/2 first.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& h) {
  if (!h.is_square()) throw Error(Errc::NotSquare, "hermitian_eig needs a square matrix");
  const std::size_t n = h.rows();
  EigenDecomposition out;
  if (n == 0) return out;

  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));

  std::vector<detail::Reflector> reflectors;
  reflectors.reserve(n > 2 ? n - 2 : 0);
  CVector sub(n, cplx{});  // sub[k] = T(k+1, k)
  CVector p, q;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    CVector x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = a(k + 1 + i, k);
    auto refl = detail::make_reflector(x);
    sub[k] = refl.image;
    if (refl.gamma != 0.0) {
      // B <- H B H with B the trailing block: p = γBu, q = p - (γ/2)(u†p)u,
      // B <- B - u q† - q u†.
      const auto& u = refl.u;
      p.assign(m, cplx{});
      for (std::size_t i = 0; i < m; ++i) {
        cplx s{};
        const cplx* brow = &a(k + 1 + i, k + 1);
        for (std::size_t j = 0; j < m; ++j) s += detail::mul(brow[j], u[j]);
        p[i] = refl.gamma * s;
      }
      const double kk = 0.5 * refl.gamma * dot(u, p).real();
      q.resize(m);
      for (std::size_t i = 0; i < m; ++i) q[i] = p[i] - kk * u[i];
      for (std::size_t i = 0; i < m; ++i) {
        cplx* brow = &a(k + 1 + i, k + 1);
        const cplx ui = u[i], qi = q[i];
        for (std::size_t j = 0; j < m; ++j)
          brow[j] -= detail::mul(ui, std::conj(q[j])) + detail::mul(qi, std::conj(u[j]));
      }
    }
    reflectors.push_back(std::move(refl));
  }
  if (n >= 2) sub[n - 2] = a(n - 1, n - 2);

  // T = D T' D† with T' real: δ_0 = 1, δ_{k+1} = δ_k · sub_k/|sub_k|.
  std::vector<double> diag(n), off(n, 0.0);
  CVector delta(n, cplx{1.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) diag[k] = a(k, k).real();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double mag = std::abs(sub[k]);
    off[k] = mag;
    delta[k + 1] = mag > 0.0 ? delta[k] * (sub[k] / mag) : delta[k];
  }

  std::vector<double> zt(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) zt[i * n + i] = 1.0;
  detail::tridiagonal_ql(diag, off, zt, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  out.values.resize(n);
  ComplexMatrix vec(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = diag[order[c]];
    const double* z = zt.data() + order[c] * n;
    for (std::size_t i = 0; i < n; ++i) vec(i, c) = delta[i] * z[i];
  }
  // Apply Q = H_0 H_1 ... H_{n-3} from the left, innermost first.
  CVector w(n);
  for (std::size_t kk = reflectors.size(); kk-- > 0;) {
    const auto& refl = reflectors[kk];
    if (refl.gamma == 0.0) continue;
    const std::size_t off0 = kk + 1;
    std::fill(w.begin(), w.end(), cplx{});
    for (std::size_t i = 0; i < refl.u.size(); ++i) {
      const cplx ui = refl.u[i];
      auto row = vec.row(off0 + i);
      for (std::size_t j = 0; j < n; ++j) w[j] += detail::cmul(ui, row[j]);
    }
    for (std::size_t i = 0; i < refl.u.size(); ++i) {
      const cplx gu = refl.gamma * refl.u[i];
      auto row = vec.row(off0 + i);
      for (std::size_t j = 0; j < n; ++j) row[j] -= detail::mul(gu, w[j]);
    }
  }
  out.vectors = std::move(vec);
  return out;
}

/// All eigenvalues of a small general complex matrix (Hessenberg reduction,
/// then single-shift QR with Wilkinson shifts). Unordered.
inline CVector general_eig_small(const ComplexMatrix& a_in) {
  if (!a_in.is_square()) throw Error(Errc::NotSquare, "general_eig_small needs a square matrix");
  const std::size_t n = a_in.rows();
  if (n > 64) throw Error(Errc::TooLarge, "general_eig_small is limited to dimension 64");
  CVector eig(n);
  if (n == 0) return eig;
  for (const auto& x : a_in.data())
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw Error(Errc::ConvergenceFailure, "non-finite matrix entry");
  ComplexMatrix a = a_in;

  // Hessenberg reduction A <- H A H.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    CVector x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = a(k + 1 + i, k);
    const auto refl = detail::make_reflector(x);
    if (refl.gamma == 0.0) continue;
    const auto& u = refl.u;
    for (std::size_t j = 0; j < n; ++j) {  // left: rows k+1..n-1
      cplx s{};
      for (std::size_t i = 0; i < m; ++i) s += detail::cmul(u[i], a(k + 1 + i, j));
      s *= refl.gamma;
      for (std::size_t i = 0; i < m; ++i) a(k + 1 + i, j) -= u[i] * s;
    }
    for (std::size_t i = 0; i < n; ++i) {  // right: cols k+1..n-1
      cplx s{};
      for (std::size_t j = 0; j < m; ++j) s += a(i, k + 1 + j) * u[j];
      s *= refl.gamma;
      for (std::size_t j = 0; j < m; ++j) a(i, k + 1 + j) -= s * std::conj(u[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  std::vector<double> cs(n);
  CVector sn(n);
  std::size_t total = 0;
  const std::size_t cap = 100 * n + 100;
  std::size_t since_deflation = 0;
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  while (hi >= 0) {
    if (hi == 0) {
      eig[0] = a(0, 0);
      break;
    }
    std::ptrdiff_t l = hi;
    while (l > 0) {
      const double mag = std::abs(a(l, l - 1));
      const double ref = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
      if (mag <= eps * (ref > 0.0 ? ref : scale)) {
        a(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      eig[hi] = a(hi, hi);
      --hi;
      since_deflation = 0;
      continue;
    }
    if (++total > cap) throw Error(Errc::ConvergenceFailure, "QR iteration did not converge");
    ++since_deflation;

    const cplx p = a(hi - 1, hi - 1), b = a(hi - 1, hi), c = a(hi, hi - 1), d = a(hi, hi);
    cplx mu;
    if (since_deflation % 11 == 10) {
      mu = d + 1.5 * std::abs(c) * cplx{0.6, 0.8};  // exceptional shift
    } else {
      const cplx half = 0.5 * (p - d);
      const cplx disc = std::sqrt(half * half + b * c);
      const cplx m1 = 0.5 * (p + d) + disc, m2 = 0.5 * (p + d) - disc;
      mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    }

    const auto lo = static_cast<std::size_t>(l), top = static_cast<std::size_t>(hi);
    for (std::size_t k = lo; k <= top; ++k) a(k, k) -= mu;
    for (std::size_t k = lo; k < top; ++k) {
      const cplx x = a(k, k), y = a(k + 1, k);
      const double ax = std::abs(x), rho = std::hypot(ax, std::abs(y));
      double cc;
      cplx ss;
      if (rho == 0.0) {
        cc = 1.0;
        ss = 0.0;
      } else if (ax == 0.0) {
        cc = 0.0;
        ss = std::conj(y) / std::abs(y);
      } else {
        cc = ax / rho;
        ss = (x / ax) * std::conj(y) / rho;
      }
      cs[k] = cc;
      sn[k] = ss;
      for (std::size_t j = k; j <= top; ++j) {
        const cplx u = a(k, j), v = a(k + 1, j);
        a(k, j) = cc * u + ss * v;
        a(k + 1, j) = -std::conj(ss) * u + cc * v;
      }
    }
    for (std::size_t k = lo; k < top; ++k) {
      const double cc = cs[k];
      const cplx ss = sn[k];
      const std::size_t last = std::min(k + 2, top);
      for (std::size_t i = lo; i <= last; ++i) {
        const cplx u = a(i, k), v = a(i, k + 1);
        a(i, k) = cc * u + std::conj(ss) * v;
        a(i, k + 1) = -ss * u + cc * v;
      }
    }
    for (std::size_t k = lo; k <= top; ++k) a(k, k) += mu;
  }
  return eig;
}

/// Thin SVD by one-sided (Hestenes) Jacobi. A ≈ U diag(σ) V†.
inline SvdResult small_svd(const ComplexMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) {
    auto t = small_svd(a.adjoint());
    return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  // Columns of A and V as contiguous vectors.
  std::vector<CVector> cols(n, CVector(m));
  std::vector<CVector> vcols(n, CVector(n, cplx{}));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) cols[j][i] = a(i, j);
    vcols[j][j] = 1.0;
  }

  constexpr double tol = 1e-15;
  constexpr int kMaxSweeps = 80;
  bool converged = n < 2;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = std::pow(norm2(cols[p]), 2);
        const double beta = std::pow(norm2(cols[q]), 2);
        const cplx gamma = dot(cols[p], cols[q]);
        const double ag = std::abs(gamma);
        if (ag == 0.0 || ag <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const cplx phase = std::conj(gamma / ag);  // rotate column q by e^{-iφ}
        const double zeta = (beta - alpha) / (2.0 * ag);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        auto rotate = [&](CVector& up, CVector& uq) {
          for (std::size_t i = 0; i < up.size(); ++i) {
            const cplx x = up[i], y = detail::mul(uq[i], phase);
            up[i] = c * x - s * y;
            uq[i] = s * x + c * y;
          }
        };
        rotate(cols[p], cols[q]);
        rotate(vcols[p], vcols[q]);
      }
    }
  }
  if (!converged) throw Error(Errc::ConvergenceFailure, "Jacobi SVD did not converge");

  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) sig[j] = norm2(cols[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });
  const double smax = n ? sig[order[0]] : 0.0;

  SvdResult out{ComplexMatrix(m, n), std::vector<double>(n), ComplexMatrix(n, n)};
  std::vector<CVector> ucols;
  std::vector<std::size_t> missing;
  ucols.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t j = order[c];
    out.sigma[c] = sig[j];
    out.v.set_col(c, vcols[j]);
    CVector u = cols[j];
    if (sig[j] > 1e-13 * smax && sig[j] > 0.0) {
      for (auto& x : u) x /= sig[j];
    } else {
      missing.push_back(c);
      u.assign(m, cplx{});
    }
    ucols.push_back(std::move(u));
  }
  // Complete U for (numerically) zero singular values.
  std::size_t probe = 0;
  for (std::size_t c : missing) {
    while (probe < m) {
      CVector e(m, cplx{});
      e[probe++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t o = 0; o < n; ++o) {
          if (o == c || norm2(ucols[o]) == 0.0) continue;
          axpy(-dot(ucols[o], e), ucols[o], e);
        }
      const double nr = norm2(e);
      if (nr > 0.5) {
        for (auto& x : e) x /= nr;
        ucols[c] = std::move(e);
        break;
      }
    }
  }
  for (std::size_t c = 0; c < n; ++c) out.u.set_col(c, ucols[c]);
  return out;
}

/// Least-squares solution X = A⁺B for A of full column rank.
inline ComplexMatrix pinv_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw Error(Errc::ShapeMismatch, "pinv_solve: row counts differ");
  if (a.rows() < a.cols()) throw Error(Errc::RankDeficient, "more columns than rows");
  const auto svd = small_svd(a);
  const std::size_t k = a.cols();
  if (k == 0) return ComplexMatrix(0, b.cols());
  if (!(svd.sigma[0] > 0.0) || svd.sigma[k - 1] <= 1e-10 * svd.sigma[0])
    throw Error(Errc::RankDeficient, "matrix is numerically rank deficient");
  ComplexMatrix y = adjoint_times(svd.u, b);  // k x p
  for (std::size_t i = 0; i < k; ++i)
    for (auto& x : y.row(i)) x /= svd.sigma[i];
  return svd.v * y;
}

/// A⁺ for A of full column rank.
inline ComplexMatrix pseudoinverse(const ComplexMatrix& a) { return pinv_solve(a, ComplexMatrix::identity(a.rows())); }

/// Largest singular value by power iteration on A†A from a fixed start.
inline double spectral_norm(const ComplexMatrix& a) {
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0 || a.max_abs() == 0.0) return 0.0;
  Rng rng(0x5EED5EEDULL);
  CVector v(n);
  for (auto& x : v) x = {1.0 + rng.uniform(), rng.uniform() - 0.5};
  double nv = norm2(v);
  for (auto& x : v) x /= nv;
  double sigma = 0.0;
  const ComplexMatrix ah = a.adjoint();
  for (int it = 0; it < 10000; ++it) {
    const CVector w = a * std::span<const cplx>(v);
    const double est = norm2(w);
    CVector y = ah * std::span<const cplx>(w);
    nv = norm2(y);
    if (nv == 0.0) return est;
    for (auto& x : y) x /= nv;
    v = std::move(y);
    if (it > 2 && std::abs(est - sigma) <= 1e-14 * est) return est;
    sigma = est;
  }
  return sigma;
}

/// max_ij |Q†Q − I|.
inline double orthonormality_defect(const ComplexMatrix& q) {
  const auto g = adjoint_times(q, q);
  double d = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

/// ‖UU† − VV†‖₂: the largest |eigenvalue| of the projector difference,
/// evaluated on span[U V] where all of its nonzero spectrum lives.
inline double sin_theta(const ComplexMatrix& u, const ComplexMatrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw Error(Errc::ShapeMismatch, "sin_theta: shapes differ");
  constexpr double kOrthoTol = 1e-8;
  if (orthonormality_defect(u) > kOrthoTol || orthonormality_defect(v) > kOrthoTol)
    throw Error(Errc::NotOrthonormal, "sin_theta needs orthonormal columns");
  const std::size_t n = u.rows(), r = u.cols();
  std::vector<CVector> basis;
  for (std::size_t j = 0; j < 2 * r; ++j) {
    CVector x = j < r ? u.col(j) : v.col(j - r);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(-dot(b, x), b, x);
    const double nx = norm2(x);
    if (nx <= 1e-12) continue;
    for (auto& e : x) e /= nx;
    basis.push_back(std::move(x));
  }
  ComplexMatrix w(n, basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) w.set_col(j, basis[j]);
  const auto wu = adjoint_times(w, u);
  const auto wv = adjoint_times(w, v);
  const auto diff = wu * wu.adjoint() - wv * wv.adjoint();
  const auto eig = hermitian_eig(diff);
  double best = 0.0;
  for (double x : eig.values) best = std::max(best, std::abs(x));
  return std::min(best, 1.0);
}

/// Unitary U minimizing ‖Q̂ − QU‖_F: the polar factor of Q†Q̂.
inline ComplexMatrix procrustes_align(const ComplexMatrix& q, const ComplexMatrix& qhat) {
  if (q.rows() != qhat.rows() || q.cols() != qhat.cols())
    throw Error(Errc::ShapeMismatch, "procrustes_align: shapes differ");
  const auto svd = small_svd(adjoint_times(q, qhat));
  return svd.u * svd.v.adjoint();
}

}  // namespace specest
