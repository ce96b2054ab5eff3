#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <span>
#include <vector>

#include "qism/errors.hpp"
#include "qism/scalar.hpp"

namespace qism {

/// Row-major dense matrix over a field. Exact rationals make sparse storage
/// unattractive at these sizes (dimension <= 4096), so everything is dense.
template <Field F>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, FieldTraits<F>::zero()) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = FieldTraits<F>::one();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  F& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const F& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const F> data() const { return data_; }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(const F& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const F& s) { return a *= s; }
  friend Matrix operator*(const F& s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::InvalidArgument, "matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const F& aik = a(i, k);
        if (FieldTraits<F>::is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorCode::InvalidArgument, "matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<F> data_;
};

/// Amplitudes over h_1 (x) ... (x) h_n; site 1 is the most significant bit and
/// local index 0 is the up (pseudovacuum) state.
template <Field F>
using StateVector = std::vector<F>;

template <Field F>
Matrix<F> kron(const Matrix<F>& a, const Matrix<F>& b) {
  Matrix<F> c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const F& aij = a(i, j);
      if (FieldTraits<F>::is_zero(aij)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

template <Field F>
StateVector<F> kron(const StateVector<F>& a, const StateVector<F>& b) {
  StateVector<F> c(a.size() * b.size(), FieldTraits<F>::zero());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) c[i * b.size() + k] = a[i] * b[k];
  return c;
}

template <Field F>
StateVector<F> operator*(const Matrix<F>& m, const StateVector<F>& v) {
  if (m.cols() != v.size()) throw Error(ErrorCode::InvalidArgument, "matrix-vector shape mismatch");
  StateVector<F> out(m.rows(), FieldTraits<F>::zero());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (FieldTraits<F>::is_zero(v[j])) continue;
      out[i] += m(i, j) * v[j];
    }
  return out;
}

template <Field F>
StateVector<F>& axpy(const F& alpha, const StateVector<F>& x, StateVector<F>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "vector length mismatch");
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
  return y;
}

template <Field F>
StateVector<F> operator-(const StateVector<F>& a, const StateVector<F>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "vector length mismatch");
  StateVector<F> c(a.size(), FieldTraits<F>::zero());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = a[k] - b[k];
  return c;
}

template <Field F>
Magnitude<F> max_norm(std::span<const F> values) {
  Magnitude<F> best = FieldTraits<F>::zero_magnitude();
  for (const F& x : values) {
    Magnitude<F> m = magnitude(x);
    if (m > best) best = m;
  }
  return best;
}

template <Field F>
Magnitude<F> max_norm(const Matrix<F>& m) {
  return max_norm<F>(m.data());
}

template <Field F>
Magnitude<F> max_norm(const StateVector<F>& v) {
  return max_norm<F>(std::span<const F>(v));
}

template <Field F>
Magnitude<F> max_abs_diff(const Matrix<F>& a, const Matrix<F>& b) {
  return max_norm(a - b);
}

template <Field F>
Magnitude<F> max_abs_diff(const StateVector<F>& a, const StateVector<F>& b) {
  return max_norm(a - b);
}

/// ||u - v||_inf / max(||u||_inf, ||v||_inf, 1); scale-free and defined at zero.
template <Field F>
Magnitude<F> relative_difference(const StateVector<F>& u, const StateVector<F>& v) {
  const Magnitude<F> scale = std::max<Magnitude<F>>({Magnitude<F>(1), max_norm(u), max_norm(v)});
  if constexpr (is_exact_v<F>) {
    Rational r = max_abs_diff(u, v) / scale;
    r.canonicalize();
    return r;
  } else {
    return max_abs_diff(u, v) / scale;
  }
}

/// Applies a 2^k x 2^k operator acting on sites [first, first + k - 1]
/// (1-based) of an n-site state, as identity (x) op (x) identity.
template <Field F>
StateVector<F> apply_on_sites(const Matrix<F>& op, std::size_t first_site, std::size_t n_sites,
                              const StateVector<F>& v) {
  const std::size_t dim_op = op.rows();
  if (op.cols() != dim_op || dim_op == 0 || (dim_op & (dim_op - 1)) != 0)
    throw Error(ErrorCode::InvalidArgument, "local operator must be square with power-of-two size");
  std::size_t k = 0;
  while ((std::size_t{1} << k) < dim_op) ++k;
  if (first_site < 1 || first_site + k - 1 > n_sites)
    throw Error(ErrorCode::InvalidRange, "operator sites fall outside the chain");
  if (v.size() != (std::size_t{1} << n_sites))
    throw Error(ErrorCode::InvalidArgument, "state length does not match 2^n");

  const std::size_t right = std::size_t{1} << (n_sites - (first_site + k - 1));
  const std::size_t left = std::size_t{1} << (first_site - 1);
  StateVector<F> out(v.size(), FieldTraits<F>::zero());
  for (std::size_t l = 0; l < left; ++l)
    for (std::size_t j = 0; j < dim_op; ++j)
      for (std::size_t r = 0; r < right; ++r) {
        const F& x = v[(l * dim_op + j) * right + r];
        if (FieldTraits<F>::is_zero(x)) continue;
        for (std::size_t i = 0; i < dim_op; ++i) {
          const F& oij = op(i, j);
          if (FieldTraits<F>::is_zero(oij)) continue;
          out[(l * dim_op + i) * right + r] += oij * x;
        }
      }
  return out;
}

/// Number of down spins (set bits) in a basis index.
inline int excitation_count(std::size_t basis_index) {
  return std::popcount(basis_index);
}

}  // namespace qism
