#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "specest/error.hpp"

namespace specest {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

namespace detail {

// Plain complex arithmetic for hot loops; std::complex operator* carries the
// Annex G inf/nan recovery path which the optimizer cannot remove.
inline cplx mul(cplx a, cplx b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
// conj(a) * b
inline cplx cmul(cplx a, cplx b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

}  // namespace detail

/// Dense complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, CVector entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) throw Error(Errc::ShapeMismatch, "entry count does not match shape");
  }
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw Error(Errc::ShapeMismatch, "ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static ComplexMatrix diagonal(std::span<const cplx> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static ComplexMatrix column(std::span<const cplx> v) {
    return ComplexMatrix(v.size(), 1, CVector(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<cplx> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  CVector col(std::size_t j) const {
    CVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  void set_col(std::size_t j, std::span<const cplx> v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw Error(Errc::ShapeMismatch, "block out of range");
    ComplexMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + i) * cols_ + c0), nc, b.row(i).begin());
    return b;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix a(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = std::conj((*this)(i, j));
    return a;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(Errc::ShapeMismatch, "inner dimensions differ");
    ComplexMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      auto crow = c.row(i);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        auto brow = b.row(k);
        for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += detail::mul(aik, brow[j]);
      }
    }
    return c;
  }

  friend CVector operator*(const ComplexMatrix& a, std::span<const cplx> x) {
    if (a.cols_ != x.size()) throw Error(Errc::ShapeMismatch, "matrix-vector dimensions differ");
    CVector y(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      cplx s{};
      auto arow = a.row(i);
      for (std::size_t j = 0; j < a.cols_; ++j) s += detail::mul(arow[j], x[j]);
      y[i] = s;
    }
    return y;
  }

  double frobenius_norm() const noexcept {
    double s = 0.0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }
  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  void check_same(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(Errc::ShapeMismatch, "operand shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  CVector data_;
};

/// A†B without forming A†.
inline ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw Error(Errc::ShapeMismatch, "row counts differ");
  ComplexMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cplx aki = arow[i];
      auto crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += detail::cmul(aki, brow[j]);
    }
  }
  return c;
}

inline double norm2(std::span<const cplx> v) noexcept {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept {  // a†b
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += detail::cmul(a[i], b[i]);
  return s;
}

inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += detail::mul(alpha, x[i]);
}

/// max_ij |A_ij - (A†)_ij|
inline double hermitian_defect(const ComplexMatrix& a) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

}  // namespace specest
