#include "mpqkd/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mpqkd {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
        << b.cols();
    throw std::invalid_argument(msg.str());
  }
}

void require_hermitian(const ComplexMatrix& m) {
  if (!m.is_square()) {
    throw std::invalid_argument("expected a square matrix");
  }
  const double asym = m.max_asymmetry();
  if (asym > kHermitianTolerance) {
    throw NotHermitianError(asym);
  }
}

double off_diagonal_mass(const ComplexMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return std::sqrt(sum);
}

double frobenius(const ComplexMatrix& a) {
  double sum = 0.0;
  for (const auto& z : a.entries()) sum += std::norm(z);
  return std::sqrt(sum);
}

// Columns of `basis` selected by `cols`, as a rows x cols.size() matrix.
ComplexMatrix select_columns(const ComplexMatrix& basis, const std::vector<std::size_t>& cols) {
  ComplexMatrix out(basis.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < basis.rows(); ++i) out(i, j) = basis(i, cols[j]);
  }
  return out;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  ComplexMatrix h = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    h(i, i) = Complex(m(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h(i, j) = avg;
      h(j, i) = std::conj(avg);
    }
  }
  return h;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : ComplexMatrix(rows, cols, std::vector<Complex>(rows * cols)) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("matrix dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("entry count does not match rows*cols");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::column(std::span<const Complex> values) {
  return ComplexMatrix(values.size(), 1, std::vector<Complex>(values.begin(), values.end()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  }
  return out;
}

Complex ComplexMatrix::trace() const {
  if (!is_square()) throw std::invalid_argument("trace of a non-square matrix");
  Complex t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_asymmetry() const {
  if (!is_square()) throw std::invalid_argument("asymmetry of a non-square matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i; j < cols_; ++j) {
      worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    }
  }
  return worst;
}

bool ComplexMatrix::is_hermitian(double tol) const { return is_square() && max_asymmetry() <= tol; }

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& z : data_) z *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex scale, ComplexMatrix m) { return m *= scale; }
ComplexMatrix operator*(double scale, ComplexMatrix m) { return m *= Complex(scale, 0.0); }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "operator*: inner dimensions differ (" << a.cols() << " vs " << b.rows() << ")";
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
      }
    }
  }
  return out;
}

Complex inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != 1 || b.cols() != 1 || a.rows() != b.rows()) {
    throw std::invalid_argument("inner: expected column vectors of equal length");
  }
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += std::conj(a(i, 0)) * b(i, 0);
  return s;
}

double norm(const ComplexMatrix& v) { return std::sqrt(inner(v, v).real()); }

ComplexMatrix projector(const ComplexMatrix& v) {
  if (v.cols() != 1) throw std::invalid_argument("projector: expected a column vector");
  return v * v.adjoint();
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
  }
  return worst;
}

NotHermitianError::NotHermitianError(double asymmetry)
    : std::invalid_argument("matrix is not Hermitian (max asymmetry " + std::to_string(asymmetry) +
                            ")"),
      asymmetry_(asymmetry) {}

EigenDecomposition hermitian_eigen(const ComplexMatrix& m) {
  require_hermitian(m);
  const std::size_t n = m.rows();
  ComplexMatrix a = hermitian_part(m);
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = std::max(1.0, frobenius(a));
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_mass(a) >= 1e-13 * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r < 1e-300) continue;
        // Phase e^{i theta} of a_pq; diag(1, e^{-i theta}) makes the pivot real.
        const Complex phase = a(p, q) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Rotation J restricted to (p, q): columns (c, -s conj(phase)) and (s, c conj(phase)).
        const Complex jpp = c;
        const Complex jqp = -s * std::conj(phase);
        const Complex jpq = s;
        const Complex jqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) { return hermitian_eigen(m).values; }

double max_hermitian_eigenvalue(const ComplexMatrix& m) {
  require_hermitian(m);
  const std::size_t n = m.rows();
  ComplexMatrix a = hermitian_part(m);

  // Householder reduction to Hermitian tridiagonal form.
  std::vector<Complex> v(n);
  std::vector<Complex> p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double x_norm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) x_norm += std::norm(a(i, k));
    x_norm = std::sqrt(x_norm);
    if (x_norm < 1e-300) continue;
    const Complex x0 = a(k + 1, k);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
    std::fill(v.begin(), v.end(), Complex(0.0, 0.0));
    for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
    v[k + 1] += phase * x_norm;
    double v_norm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) v_norm += std::norm(v[i]);
    v_norm = std::sqrt(v_norm);
    if (v_norm < 1e-300) continue;
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= v_norm;

    // A <- H A H with H = I - 2 v v^dagger: A - 2 v q^dagger - 2 q v^dagger, q = p - (v^dagger p) v.
    for (std::size_t i = k; i < n; ++i) {
      Complex sum = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) sum += a(i, j) * v[j];
      p[i] = sum;
    }
    Complex vp = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vp += std::conj(v[i]) * p[i];
    for (std::size_t i = k; i < n; ++i) p[i] -= vp.real() * v[i];
    for (std::size_t i = k; i < n; ++i) {
      for (std::size_t j = k; j < n; ++j) {
        a(i, j) -= 2.0 * (v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]));
      }
    }
  }

  std::vector<double> diag(n);
  std::vector<double> off_sq(n, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = a(i, i).real();
    if (i + 1 < n) off_sq[i] = std::norm(a(i + 1, i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double radius = (i > 0 ? std::sqrt(off_sq[i - 1]) : 0.0) + std::sqrt(off_sq[i]);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }

  // Sturm count: number of eigenvalues strictly below lambda.
  auto count_below = [&](double lambda) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      q = diag[i] - lambda - (i > 0 ? off_sq[i - 1] / q : 0.0);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  };
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count_below(mid) < n ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool is_psd(const ComplexMatrix& m, double tol) { return hermitian_eigenvalues(m).front() >= -tol; }

GeneralizedEigenSolver::GeneralizedEigenSolver(const ComplexMatrix& den, double tol)
    : tol_(tol), support_(1, 1) {
  const EigenDecomposition den_eig = hermitian_eigen(den);
  const double kernel_threshold = tol * std::max(1.0, den_eig.values.back());
  if (den_eig.values.front() < -kernel_threshold) {
    std::ostringstream msg;
    msg << "denominator is not PSD (min eigenvalue " << den_eig.values.front() << ")";
    throw std::invalid_argument(msg.str());
  }

  std::vector<std::size_t> support;
  std::vector<std::size_t> kernel;
  for (std::size_t j = 0; j < den_eig.values.size(); ++j) {
    (den_eig.values[j] > kernel_threshold ? support : kernel).push_back(j);
  }
  if (support.empty()) {
    // y*0 - num >= 0 carries no information about y.
    throw std::invalid_argument("denominator is numerically zero");
  }
  support_ = select_columns(den_eig.vectors, support);
  if (!kernel.empty()) kernel_ = select_columns(den_eig.vectors, kernel);
  for (std::size_t j : support) inv_sqrt_.push_back(1.0 / std::sqrt(den_eig.values[j]));
}

ProjectedNumerator& ProjectedNumerator::operator+=(const ProjectedNumerator& other) {
  support += other.support;
  if (kernel) *kernel += *other.kernel;
  if (cross) *cross += *other.cross;
  scale += other.scale;
  return *this;
}

ProjectedNumerator& ProjectedNumerator::operator*=(double factor) {
  support *= factor;
  if (kernel) *kernel *= factor;
  if (cross) *cross *= factor;
  scale *= std::abs(factor);
  return *this;
}

ProjectedNumerator GeneralizedEigenSolver::project(const ComplexMatrix& num) const {
  require_hermitian(num);
  if (num.rows() != support_.rows()) {
    throw std::invalid_argument("project: numerator dimension mismatch");
  }
  double num_scale = 0.0;
  for (const auto& z : num.entries()) num_scale = std::max(num_scale, std::abs(z));

  ComplexMatrix reduced = hermitian_part(support_.adjoint() * num * support_);
  for (std::size_t i = 0; i < inv_sqrt_.size(); ++i) {
    for (std::size_t j = 0; j < inv_sqrt_.size(); ++j) reduced(i, j) *= inv_sqrt_[i] * inv_sqrt_[j];
  }
  ProjectedNumerator out{std::move(reduced), std::nullopt, std::nullopt, num_scale};
  if (kernel_) {
    out.kernel = hermitian_part(kernel_->adjoint() * num * *kernel_);
    ComplexMatrix cross = support_.adjoint() * num * *kernel_;
    for (std::size_t i = 0; i < inv_sqrt_.size(); ++i) {
      for (std::size_t j = 0; j < cross.cols(); ++j) cross(i, j) *= inv_sqrt_[i];
    }
    out.cross = std::move(cross);
  }
  return out;
}

std::optional<double> GeneralizedEigenSolver::max_eigenvalue(const ComplexMatrix& num) const {
  return max_eigenvalue(project(num));
}

std::optional<double> GeneralizedEigenSolver::max_eigenvalue(const ProjectedNumerator& num) const {
  ComplexMatrix reduced = num.support;
  if (num.kernel) {
    const double num_threshold = tol_ * std::max(1.0, num.scale);
    const std::size_t k_dim = num.kernel->cols();
    double kernel_entry = 0.0;
    for (const auto& z : num.kernel->entries()) kernel_entry = std::max(kernel_entry, std::abs(z));
    if (kernel_entry * k_dim <= num_threshold && frobenius(*num.cross) <= num_threshold) {
      // Kernel block and coupling both vanish: the kernel imposes nothing.
      return max_hermitian_eigenvalue(reduced);
    }
    const EigenDecomposition kernel_block = hermitian_eigen(*num.kernel);
    if (kernel_block.values.back() > num_threshold) return std::nullopt;

    for (std::size_t j = 0; j < k_dim; ++j) {
      const double mu = kernel_block.values[j];
      ComplexMatrix u(k_dim, 1);
      for (std::size_t i = 0; i < k_dim; ++i) u(i, 0) = kernel_block.vectors(i, j);
      const ComplexMatrix coupling = *num.cross * u;
      if (mu >= -num_threshold) {
        if (norm(coupling) > num_threshold) return std::nullopt;
        continue;
      }
      // Schur complement of a strictly negative kernel direction.
      reduced += (1.0 / -mu) * projector(coupling);
    }
  }
  return max_hermitian_eigenvalue(hermitian_part(reduced));
}

std::optional<double> max_generalized_eigenvalue(const ComplexMatrix& num, const ComplexMatrix& den,
                                                 double tol) {
  require_hermitian(num);
  require_hermitian(den);
  require_same_shape(num, den, "max_generalized_eigenvalue");
  return GeneralizedEigenSolver(den, tol).max_eigenvalue(num);
}

}  // namespace mpqkd
