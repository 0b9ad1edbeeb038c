#pragma once

// Seeded oracle suites over the checks in analysis.hpp, aggregated into
// per-oracle reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specest/analysis.hpp"

namespace specest {

struct OracleReport {
  std::string oracle_name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  double tolerance = kOracleTolerance;
  /// Test hook: make every check fail so callers can exercise the failure path.
  bool break_tolerance = false;
};

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"all", "moitra", "perturbation", "schur", "noise_norm", "lower_bound"};
  return names;
}

namespace detail {

/// Collects OracleChecks into reports keyed by oracle name, in first-seen order.
class ReportBuilder {
 public:
  explicit ReportBuilder(const VerifyOptions& opt) : opt_(opt) {}

  void add(const OracleCheck& c) {
    auto& rep = slot(c.name);
    ++rep.instances;
    if (c.skipped) {
      ++rep.skipped;
      return;
    }
    const bool ok = !opt_.break_tolerance && c.pass(opt_.tolerance);
    if (!ok) ++rep.failures;
    rep.worst_slack = std::min(rep.worst_slack, c.slack());
  }

  std::vector<OracleReport> take() { return std::move(reports_); }

 private:
  OracleReport& slot(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      it = index_.emplace(name, reports_.size()).first;
      reports_.push_back({name});
    }
    return reports_[it->second];
  }

  VerifyOptions opt_;
  std::vector<OracleReport> reports_;
  std::map<std::string, std::size_t> index_;
};

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = {rng.normal(), rng.normal()};
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  const auto g = random_matrix(n, n, rng);
  auto h = g + g.adjoint();
  h *= 0.5;
  return h;
}

/// Q diag(λ) Q† with Q a random unitary (eigenvectors of a random Hermitian).
inline ComplexMatrix hermitian_with_spectrum(std::span<const double> lambda, Rng& rng) {
  const auto q = hermitian_eig(random_hermitian(lambda.size(), rng)).vectors;
  return q * ComplexMatrix::diagonal(lambda) * q.adjoint();
}

inline ComplexMatrix scaled_to_norm(ComplexMatrix m, double target) {
  const double s = spectral_norm(m);
  if (s > 0.0) m *= target / s;
  return m;
}

// Unit-circle nodes with pairwise chordal distance at least `min_sep`.
inline CVector separated_nodes(std::size_t k, double min_sep, Rng& rng) {
  for (;;) {
    CVector z;
    for (std::size_t i = 0; i < k; ++i) z.push_back(unit_phasor(rng.uniform()));
    if (min_pairwise_distance(z) >= min_sep) return z;
  }
}

}  // namespace detail

/// Moitra's singular-value bounds and the Gram deviation on 100 node sets
/// with 2 ≤ k ≤ 5, δ ≥ 0.1 and n = 128.
inline std::vector<OracleReport> run_moitra_suite(const VerifyOptions& opt = {}) {
  detail::ReportBuilder out(opt);
  Rng rng(derive_seed(opt.seed, 1, 0));
  constexpr std::size_t n = 128;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t k = 2 + rng.next_u64() % 4;
    const auto z = detail::separated_nodes(k, 0.1, rng);
    const auto rep = moitra_bounds_check(z, n);
    out.add({"moitra_upper", rep.sigma_max, rep.upper_bound, rep.upper_bound});
    out.add({"moitra_lower", rep.lower_bound, rep.sigma_min, rep.lower_bound});
    out.add({"gram_deviation", rep.gram_deviation, 2.0 * std::numbers::pi / (rep.delta * n) * 1.01, 0.0});
  }
  return out.take();
}

/// 200 seeded instances per perturbation theorem, all dimensions ≤ 16.
inline std::vector<OracleReport> run_perturbation_suite(const VerifyOptions& opt = {}) {
  detail::ReportBuilder out(opt);
  constexpr int kInstances = 200;

  // Weyl on generic Hermitian pairs.
  Rng rng(derive_seed(opt.seed, 2, 0));
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t n = 2 + rng.next_u64() % 15;
    const auto a = detail::random_hermitian(n, rng);
    auto e = detail::random_hermitian(n, rng);
    e *= std::pow(10.0, rng.uniform(-3.0, 0.5));
    for (const auto& c : perturbation_oracles(a, e, 1 + rng.next_u64() % (n - 1)))
      if (c.name == "weyl") out.add(c);
  }

  // Davis–Kahan and distance-from-angles on a planted eigengap.
  rng = Rng(derive_seed(opt.seed, 2, 1));
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t n = 2 + rng.next_u64() % 15;
    const std::size_t r = 1 + rng.next_u64() % (n - 1);
    std::vector<double> lambda(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = i < r ? rng.uniform(5.0, 10.0) : rng.uniform(-3.0, 3.0);
    const auto a = detail::hermitian_with_spectrum(lambda, rng);
    const auto e = detail::scaled_to_norm(detail::random_hermitian(n, rng), rng.uniform(0.001, 1.0));
    for (const auto& c : perturbation_oracles(a, e, r))
      if (c.name != "weyl") out.add(c);
  }

  // Ostrowski with positive definite A and full-column-rank B.
  rng = Rng(derive_seed(opt.seed, 2, 2));
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t r = 1 + rng.next_u64() % 5;
    const std::size_t n = r + rng.next_u64() % (17 - r);
    std::vector<double> lambda(r);
    for (auto& l : lambda) l = rng.uniform(0.1, 5.0);
    out.add(ostrowski_check(detail::hermitian_with_spectrum(lambda, rng), detail::random_matrix(n, r, rng)));
  }

  // Bauer–Fike on V diag(λ) V⁻¹ with V a moderate perturbation of I.
  rng = Rng(derive_seed(opt.seed, 2, 3));
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t r = 1 + rng.next_u64() % 4;
    auto v = detail::random_matrix(r, r, rng);
    v *= 0.3 / std::sqrt(static_cast<double>(r));
    v = v + ComplexMatrix::identity(r);
    CVector lambda(r);
    for (auto& l : lambda) l = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const auto e = detail::scaled_to_norm(detail::random_matrix(r, r, rng), std::pow(10.0, rng.uniform(-4.0, -0.5)));
    for (const auto& c : bauer_fike_check(v, lambda, e)) out.add(c);
  }

  // Pseudoinverse perturbation with ‖E‖ < σ_min(A).
  rng = Rng(derive_seed(opt.seed, 2, 4));
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t k = 1 + rng.next_u64() % 6;
    const std::size_t m = k + rng.next_u64() % (17 - k);
    const auto a = detail::random_matrix(m, k, rng);
    const double smin = small_svd(a).sigma.back();
    const auto e = detail::scaled_to_norm(detail::random_matrix(m, k, rng), rng.uniform(0.001, 0.9) * smin);
    out.add(pinv_perturbation_check(a, e));
  }
  return out.take();
}

/// Residue sum against the Schur formula for m ∈ {−1..5}, ℓ ∈ {1..4}, and the
/// exact coefficient-sum identity for m ≤ 6, ℓ ≤ 5.
inline std::vector<OracleReport> run_schur_suite(const VerifyOptions& opt = {}) {
  detail::ReportBuilder out(opt);
  Rng rng(derive_seed(opt.seed, 3, 0));
  for (int m = -1; m <= 5; ++m) {
    for (std::size_t ell = 1; ell <= 4; ++ell) {
      for (int inst = 0; inst < 50; ++inst) {
        std::vector<double> lambda;
        while (lambda.size() < ell) {
          const double x = rng.uniform(0.5, 2.0);
          bool far = true;
          for (double y : lambda) far = far && std::abs(x - y) >= 0.05;
          if (far) lambda.push_back(x);
        }
        const double residue = contour_A(m, lambda, ContourMode::residue);
        const double schur = contour_A(m, lambda, ContourMode::schur);
        const double allowed = schur == 0.0 ? 1e-12 : 1e-9 * std::abs(schur);
        out.add({"schur_contour_identity", std::abs(residue - schur), allowed, 0.0});
      }
    }
  }
  for (int m = 0; m <= 6; ++m) {
    for (std::size_t ell = 1; ell <= 5; ++ell) {
      const auto count = schur_mm0_coefficient_sum(m, ell);
      const auto want = binomial(static_cast<std::uint64_t>(m) + ell - 1, ell - 1);
      out.add({"schur_coefficient_sum", count == want ? 0.0 : 1.0, 0.0, 0.0});
    }
  }
  return out.take();
}

struct NoiseNormSample {
  std::size_t n = 0;
  std::vector<double> ratios;  // ‖E_random‖₂ / (α√(n ln n)) per trial

  /// (max − min) / mean
  double relative_spread() const {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    double mean = 0.0;
    for (double x : ratios) mean += x;
    mean /= static_cast<double>(ratios.size());
    return (*hi - *lo) / mean;
  }
};

/// ‖Toep(E)‖₂ / (α√(n ln n)) for complex Gaussian noise with α = 1.
inline std::vector<NoiseNormSample> noise_norm_samples(std::uint64_t seed, std::span<const std::size_t> n_values,
                                                       int trials) {
  std::vector<NoiseNormSample> out;
  for (std::size_t n : n_values) {
    NoiseNormSample s{n, {}};
    const double denom = std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
    for (int t = 0; t < trials; ++t) {
      const auto e = sample_noise(n, {1.0, NoiseKind::complex_gaussian, derive_seed(seed, n, static_cast<std::uint64_t>(t))});
      s.ratios.push_back(spectral_norm(HermitianToeplitz(e), 5000, 1e-10) / denom);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Largest relative spread growth we still call bounded when n quadruples.
inline constexpr double kSpreadGrowthLimit = 1.5;

inline std::vector<OracleReport> run_noise_norm_suite(const VerifyOptions& opt = {}) {
  detail::ReportBuilder out(opt);
  const std::size_t ns[] = {256, 1024};
  const auto samples = noise_norm_samples(derive_seed(opt.seed, 4, 0), ns, 20);
  for (const auto& s : samples)
    for (double ratio : s.ratios) out.add({"noise_norm_ratio", std::max(0.1 - ratio, ratio - 10.0), 0.0, 0.0});
  out.add({"noise_norm_spread", samples[1].relative_spread(), kSpreadGrowthLimit * samples[0].relative_spread(), 0.0});
  return out.take();
}

/// TV bound ≤ 2n^{1.5}ε and decreasing in n, for ε = n^{−1.6}.
inline std::vector<OracleReport> run_lower_bound_suite(const VerifyOptions& opt = {}) {
  detail::ReportBuilder out(opt);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100, 1000, 10000}) {
    const double nd = static_cast<double>(n);
    const double eps = std::pow(nd, -1.6);
    const auto rep = tv_lower_bound_demo(n, eps);
    out.add({"tv_bound", rep.tv_bound, 2.0 * std::pow(nd, 1.5) * eps, 0.0});
    out.add({"tv_decreasing", rep.tv_bound, previous, 0.0});
    previous = rep.tv_bound;
  }
  return out.take();
}

inline std::vector<OracleReport> run_verify_suite(std::string_view suite, const VerifyOptions& opt = {}) {
  if (suite == "moitra") return run_moitra_suite(opt);
  if (suite == "perturbation") return run_perturbation_suite(opt);
  if (suite == "schur") return run_schur_suite(opt);
  if (suite == "noise_norm") return run_noise_norm_suite(opt);
  if (suite == "lower_bound") return run_lower_bound_suite(opt);
  if (suite == "all") {
    std::vector<OracleReport> all;
    for (const auto& name : verify_suite_names()) {
      if (name == "all") continue;
      auto part = run_verify_suite(name, opt);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw Error(Errc::ConfigInvalid, "unknown suite '" + std::string(suite) + "'");
}

inline std::size_t total_failures(std::span<const OracleReport> reports) {
  std::size_t n = 0;
  for (const auto& r : reports) n += r.failures;
  return n;
}

inline nlohmann::json to_json(std::span<const OracleReport> reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j{{"oracle_name", r.oracle_name}, {"instances", r.instances}, {"failures", r.failures}};
    if (r.skipped) j["skipped"] = r.skipped;
    // Infinite slack (every instance skipped) has no JSON number.
    j["worst_slack"] = std::isfinite(r.worst_slack) ? nlohmann::json(r.worst_slack) : nlohmann::json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace specest
