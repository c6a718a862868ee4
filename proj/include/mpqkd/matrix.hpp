#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpqkd {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. State vectors are stored as n x 1 columns.
class ComplexMatrix {
 public:
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix column(std::span<const Complex> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> entries() const { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;

  /// max |m_ij - conj(m_ji)|; throws for non-square input.
  double max_asymmetry() const;
  bool is_hermitian(double tol = 1e-12) const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex scale, ComplexMatrix m);
ComplexMatrix operator*(double scale, ComplexMatrix m);

/// Kronecker product.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// <a|b> for column vectors.
Complex inner(const ComplexMatrix& a, const ComplexMatrix& b);
double norm(const ComplexMatrix& v);
/// |v><v| for a column vector v.
ComplexMatrix projector(const ComplexMatrix& v);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

class NotHermitianError : public std::invalid_argument {
 public:
  explicit NotHermitianError(double asymmetry);
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column j pairs with values[j]
};

inline constexpr double kHermitianTolerance = 1e-12;

/// Cyclic Jacobi on a Hermitian matrix.
EigenDecomposition hermitian_eigen(const ComplexMatrix& m);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

/// Largest eigenvalue via Householder tridiagonalization and Sturm bisection.
double max_hermitian_eigenvalue(const ComplexMatrix& m);

bool is_psd(const ComplexMatrix& m, double tol);

// min{ y : y*den - num >= 0 } for Hermitian num and PSD den.
// Returns nullopt when no finite y exists. Directions with den eigenvalue
// <= tol*max(1, lambda_max(den)) are treated as den's kernel.
std::optional<double> max_generalized_eigenvalue(const ComplexMatrix& num, const ComplexMatrix& den,
                                                 double tol = 1e-10);

/// A numerator expressed in the eigenbasis of a fixed denominator. Linear in
/// the numerator, so families num0 + x*num1 can be projected once.
struct ProjectedNumerator {
  ComplexMatrix support;                // S^dagger num S, scaled by den^{-1/2} on both sides
  std::optional<ComplexMatrix> kernel;  // K^dagger num K
  std::optional<ComplexMatrix> cross;   // den^{-1/2} S^dagger num K
  double scale;                         // max |num_ij|, for the kernel tolerance

  ProjectedNumerator& operator+=(const ProjectedNumerator& other);
  ProjectedNumerator& operator*=(double factor);
};

/// Same as max_generalized_eigenvalue with den's eigendecomposition computed once.
class GeneralizedEigenSolver {
 public:
  explicit GeneralizedEigenSolver(const ComplexMatrix& den, double tol = 1e-10);

  std::optional<double> max_eigenvalue(const ComplexMatrix& num) const;
  std::optional<double> max_eigenvalue(const ProjectedNumerator& num) const;
  ProjectedNumerator project(const ComplexMatrix& num) const;

  std::size_t dim() const { return support_.rows(); }
  std::size_t kernel_dim() const { return kernel_ ? kernel_->cols() : 0; }

 private:
  double tol_;
  ComplexMatrix support_;                // orthonormal basis of den's support
  std::optional<ComplexMatrix> kernel_;  // orthonormal basis of den's kernel
  std::vector<double> inv_sqrt_;         // 1/sqrt(eigenvalue) per support column
};

}  // namespace mpqkd
