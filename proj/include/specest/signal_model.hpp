#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specest/error.hpp"
#include "specest/matrix.hpp"
#include "specest/rng.hpp"

namespace specest {

/// exp(2πi f) for a location f given in cycles.
inline cplx unit_phasor(double f) noexcept {
  const double t = 2.0 * std::numbers::pi * f;
  return {std::cos(t), std::sin(t)};
}

/// |exp(2πi f) - exp(2πi g)| evaluated as 2|sin(π(f-g))|, which stays accurate
/// for nearby locations and is exactly invariant under a common shift.
inline double chord(double f, double g) noexcept { return 2.0 * std::abs(std::sin(std::numbers::pi * (f - g))); }

/// Point sources on the unit circle with positive intensities. The first r
/// entries (largest intensities) are the dominant part, the rest the tail.
class SpectralMeasure {
 public:
  /// Sorts by intensity (descending, stable), rescales to unit total mass and
  /// rejects coincident dominant/other pairs.
  static SpectralMeasure create(std::vector<double> locations, std::vector<double> intensities, std::size_t r) {
    if (locations.size() != intensities.size())
      throw Error(Errc::LengthMismatch, "locations and intensities differ in length");
    if (locations.empty()) throw Error(Errc::LengthMismatch, "measure needs at least one source");
    if (r < 1 || r > locations.size()) throw Error(Errc::InvalidRank, "r must satisfy 1 <= r <= d");
    for (double f : locations)
      if (!(f >= 0.0 && f < 1.0)) throw Error(Errc::OutOfRangeLocation, "location outside [0,1): " + std::to_string(f));
    for (double m : intensities)
      if (!(m > 0.0) || !std::isfinite(m)) throw Error(Errc::NonPositiveIntensity, "intensity must be positive");

    std::vector<std::size_t> order(locations.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return intensities[a] > intensities[b]; });
    const double total = std::accumulate(intensities.begin(), intensities.end(), 0.0);

    SpectralMeasure m;
    m.r_ = r;
    for (std::size_t k : order) {
      m.locations_.push_back(locations[k]);
      m.intensities_.push_back(intensities[k] / total);
    }
    if (m.separation() == 0.0) throw Error(Errc::ZeroSeparation, "a dominant location coincides with another location");
    return m;
  }

  std::span<const double> locations() const noexcept { return locations_; }
  std::span<const double> intensities() const noexcept { return intensities_; }
  std::size_t r() const noexcept { return r_; }
  std::size_t d() const noexcept { return locations_.size(); }

  CVector nodes() const {
    CVector z(d());
    for (std::size_t i = 0; i < d(); ++i) z[i] = unit_phasor(locations_[i]);
    return z;
  }
  CVector dominant_nodes() const {
    auto z = nodes();
    z.resize(r_);
    return z;
  }
  std::vector<double> dominant_intensities() const {
    return {intensities_.begin(), intensities_.begin() + static_cast<std::ptrdiff_t>(r_)};
  }

  /// Δ_z: smallest chordal distance between a dominant node and any other
  /// node. Infinite when d = 1.
  double separation() const noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < d(); ++j)
        if (i != j) best = std::min(best, chord(locations_[i], locations_[j]));
    return best;
  }

  /// Total intensity outside the dominant block.
  double tail_mass() const noexcept {
    return std::accumulate(intensities_.begin() + static_cast<std::ptrdiff_t>(r_), intensities_.end(), 0.0);
  }

  /// Whether the tail is light enough for the ESPRIT error guarantee
  /// (tail mass at most μ_r / 8).
  bool tail_condition_holds() const noexcept { return tail_mass() <= intensities_[r_ - 1] / 8.0; }

 private:
  SpectralMeasure() = default;

  std::vector<double> locations_;
  std::vector<double> intensities_;
  std::size_t r_ = 1;
};

enum class NoiseKind { complex_gaussian, real_gaussian, none };

struct NoiseSpec {
  double alpha = 0.0;
  NoiseKind kind = NoiseKind::none;
  std::uint64_t seed = 0;
};

inline std::string_view to_string(NoiseKind k) noexcept {
  switch (k) {
    case NoiseKind::complex_gaussian: return "complex_gaussian";
    case NoiseKind::real_gaussian: return "real_gaussian";
    case NoiseKind::none: return "none";
  }
  return "none";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "complex_gaussian") return NoiseKind::complex_gaussian;
  if (s == "real_gaussian") return NoiseKind::real_gaussian;
  if (s == "none") return NoiseKind::none;
  throw Error(Errc::ConfigInvalid, "unknown noise_kind '" + std::string(s) + "'");
}

/// Samples g_0..g_{n-1}.
struct MeasurementSeries {
  CVector samples;

  std::size_t n() const noexcept { return samples.size(); }
};

/// Clean samples g_j = Σ μ_i z_i^j.
inline MeasurementSeries synthesize(const SpectralMeasure& m, std::size_t n) {
  if (n < 1) throw Error(Errc::InvalidRank, "n must be at least 1");
  MeasurementSeries g{CVector(n)};
  const auto f = m.locations();
  const auto mu = m.intensities();
  for (std::size_t i = 0; i < m.d(); ++i) {
    // Direct evaluation of each power keeps the phase error O(ε·j) rather
    // than accumulating through repeated multiplication.
    for (std::size_t j = 0; j < n; ++j) {
      const double cycles = std::fmod(f[i] * static_cast<double>(j), 1.0);
      g.samples[j] += mu[i] * unit_phasor(cycles);
    }
  }
  g.samples[0] = {g.samples[0].real(), 0.0};
  return g;
}

/// Measurement noise E_0..E_{n-1}. E_0 is always real so that Toep(g) keeps a
/// real diagonal; complex draws use E = α(X + iY)/√2.
inline CVector sample_noise(std::size_t n, const NoiseSpec& spec) {
  CVector e(n);
  if (spec.kind == NoiseKind::none || spec.alpha == 0.0) return e;
  Rng rng(spec.seed);
  if (n > 0) e[0] = spec.alpha * rng.normal();
  const double s = spec.alpha / std::numbers::sqrt2;
  for (std::size_t j = 1; j < n; ++j) {
    if (spec.kind == NoiseKind::complex_gaussian) {
      const double x = rng.normal();
      const double y = rng.normal();
      e[j] = {s * x, s * y};
    } else {
      e[j] = spec.alpha * rng.normal();
    }
  }
  return e;
}

inline MeasurementSeries add_noise(MeasurementSeries g, std::span<const cplx> noise) {
  if (noise.size() != g.n()) throw Error(Errc::LengthMismatch, "noise length differs from signal length");
  for (std::size_t j = 0; j < g.n(); ++j) g.samples[j] += noise[j];
  return g;
}

struct Matching {
  double distance = 0.0;
  /// a[i] is paired with b[perm[i]].
  std::vector<std::size_t> perm;
};

inline constexpr std::size_t kMaxExhaustiveMatching = 8;

/// Optimal matching distance min_π max_i |a_i − b_π(i)| by exhaustive search.
inline Matching matching_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "matching inputs differ in length");
  const std::size_t r = a.size();
  if (r > kMaxExhaustiveMatching) throw Error(Errc::TooLarge, "exhaustive matching limited to 8 points");
  std::vector<double> cost(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) cost[i * r + j] = std::abs(a[i] - b[j]);

  std::vector<std::size_t> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  Matching best{std::numeric_limits<double>::infinity(), perm};
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < r && worst < best.distance; ++i) worst = std::max(worst, cost[i * r + perm[i]]);
    if (worst < best.distance) best = {worst, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (r == 0) best.distance = 0.0;
  return best;
}

inline Matching matching_distance(std::span<const double> a, std::span<const double> b) {
  CVector ca(a.begin(), a.end()), cb(b.begin(), b.end());
  return matching_distance(std::span<const cplx>(ca), std::span<const cplx>(cb));
}

/// max_i |a_i − b_perm[i]| for a pairing fixed elsewhere.
inline double paired_distance(std::span<const double> a, std::span<const double> b,
                              std::span<const std::size_t> perm) {
  if (a.size() != b.size() || perm.size() != a.size())
    throw Error(Errc::LengthMismatch, "paired distance inputs differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
  return worst;
}

}  // namespace specest
