#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "specest/dense_linalg.hpp"
#include "specest/error.hpp"
#include "specest/signal_model.hpp"
#include "specest/toeplitz.hpp"

namespace specest {

enum class Solver { dense, fast };

inline std::string_view to_string(Solver s) noexcept { return s == Solver::dense ? "dense" : "fast"; }

inline Solver parse_solver(std::string_view s) {
  if (s == "dense") return Solver::dense;
  if (s == "fast") return Solver::fast;
  throw Error(Errc::ConfigInvalid, "unknown solver '" + std::string(s) + "'");
}

struct IntensityEstimate {
  std::vector<double> mu;
  double max_imag = 0.0;    // largest |Im| discarded from the complex least-squares solution
  double max_clamped = 0.0; // largest negative real part that was clamped to zero
};

struct EstimationResult {
  CVector z_hat;                 // unit modulus, arguments ascending in [0, 2π)
  std::vector<double> mu_hat;
  CVector w_eigenvalues;         // eigenvalues of W, same order as z_hat, before projection
  Solver solver_used = Solver::dense;
  std::chrono::duration<double, std::milli> wall_time{};

  double imag_g0 = 0.0;          // |Im g_0| dropped when forming Toep(g)
  double max_intensity_imag = 0.0;
  double max_intensity_clamped = 0.0;
  bool degenerate = false;       // some eigenvalue of W was exactly zero
  std::vector<double> top_eigenvalues;
  std::size_t solver_iterations = 0;

  std::vector<double> arguments() const {
    std::vector<double> a;
    for (const auto& z : z_hat) a.push_back(wrapped_arg(z));
    return a;
  }

  static double wrapped_arg(cplx z) noexcept {
    double a = std::arg(z);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    if (a >= 2.0 * std::numbers::pi) a = 0.0;
    return a;
  }
};

/// Hermitian Toeplitz matrix whose first column is (Re g_0, g_1, …, g_{n−1}).
inline HermitianToeplitz toeplitz_from_signal(const MeasurementSeries& g) {
  if (g.n() < 1) throw Error(Errc::InvalidRank, "signal must have at least one sample");
  return HermitianToeplitz(g.samples);
}

/// n×k matrix whose column j is (1, z_j, …, z_j^{n−1}).
inline ComplexMatrix vandermonde(std::span<const cplx> z, std::size_t n) {
  ComplexMatrix v(n, z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    // Unit-modulus nodes: evaluate powers through the argument to avoid
    // drift from repeated multiplication.
    const bool unit = std::abs(std::abs(z[j]) - 1.0) < 1e-12;
    const double theta = std::arg(z[j]);
    cplx acc{1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      if (unit) {
        const double a = theta * static_cast<double>(i);
        v(i, j) = {std::cos(a), std::sin(a)};
      } else {
        v(i, j) = acc;
        acc *= z[j];
      }
    }
  }
  return v;
}

/// Least-squares intensities V_n(ẑ)⁺g: real parts, negatives clamped to 0.
inline IntensityEstimate estimate_intensities(std::span<const cplx> z_hat, const MeasurementSeries& g) {
  if (g.n() < z_hat.size()) throw Error(Errc::RankDeficient, "fewer samples than nodes");
  const auto v = vandermonde(z_hat, g.n());
  const auto sol = pinv_solve(v, ComplexMatrix::column(g.samples));
  IntensityEstimate out;
  out.mu.resize(z_hat.size());
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    const cplx c = sol(i, 0);
    out.max_imag = std::max(out.max_imag, std::abs(c.imag()));
    if (c.real() < 0.0) {
      out.max_clamped = std::max(out.max_clamped, -c.real());
      out.mu[i] = 0.0;
    } else {
      out.mu[i] = c.real();
    }
  }
  return out;
}

struct EspritOptions {
  double tol = 1e-12;
  std::size_t max_iter = 20000;
};

/// ESPRIT: dominant eigenvectors of Toep(g), rotational invariance between
/// their first and last n−1 rows, eigenvalues projected to the unit circle,
/// intensities by least squares.
inline EstimationResult run_esprit(const MeasurementSeries& g, std::size_t r, Solver solver, std::uint64_t seed = 0,
                                   const EspritOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = g.n();
  if (r < 1 || n < 2 || r > n - 1) throw Error(Errc::InvalidRank, "ESPRIT needs 1 <= r <= n-1");

  EstimationResult res;
  res.solver_used = solver;
  res.imag_g0 = std::abs(g.samples[0].imag());
  const auto t = toeplitz_from_signal(g);
  if (t.max_row_sum() == 0.0) throw Error(Errc::SolverFailure, "zero signal has no dominant subspace");

  ComplexMatrix q;
  try {
    if (solver == Solver::dense) {
      auto eig = hermitian_eig(t.dense());
      q = eig.vectors.block(0, 0, n, r);
      res.top_eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r));
    } else {
      auto sub = top_r_eigs(t, r, opt.tol, opt.max_iter, seed);
      q = std::move(sub.q_r);
      res.top_eigenvalues = std::move(sub.values);
      res.solver_iterations = sub.iterations;
    }
  } catch (const Error& e) {
    throw Error(Errc::SolverFailure, e.what());
  }

  const auto up = q.block(0, 0, n - 1, r);
  const auto down = q.block(1, 0, n - 1, r);
  ComplexMatrix w;
  try {
    w = pinv_solve(up, down);
  } catch (const Error& e) {
    if (e.code() == Errc::RankDeficient) throw Error(Errc::RankDeficientUpBlock, e.what());
    throw;
  }

  CVector lambda;
  try {
    lambda = general_eig_small(w);
  } catch (const Error& e) {
    throw Error(Errc::SolverFailure, e.what());
  }
  std::sort(lambda.begin(), lambda.end(), [](cplx a, cplx b) {
    const double aa = EstimationResult::wrapped_arg(a), ab = EstimationResult::wrapped_arg(b);
    if (aa != ab) return aa < ab;
    return std::abs(a) < std::abs(b);
  });

  res.w_eigenvalues = lambda;
  res.z_hat.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (lambda[i] == cplx{}) res.degenerate = true;
    const double a = lambda[i] == cplx{} ? 0.0 : std::arg(lambda[i]);
    res.z_hat[i] = {std::cos(a), std::sin(a)};
  }

  try {
    auto mu = estimate_intensities(res.z_hat, g);
    res.mu_hat = std::move(mu.mu);
    res.max_intensity_imag = mu.max_imag;
    res.max_intensity_clamped = mu.max_clamped;
  } catch (const Error& e) {
    throw Error(Errc::SolverFailure, std::string("intensity solve failed: ") + e.what());
  }
  res.wall_time = std::chrono::steady_clock::now() - start;
  return res;
}

}  // namespace specest
