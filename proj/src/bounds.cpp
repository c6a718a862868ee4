#include "mpqkd/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "mpqkd/numerics.hpp"

namespace mpqkd {

namespace {

using Mat2 = std::array<Complex, 4>;  // row-major
using Vec2 = std::array<Complex, 2>;

Mat2 to_mat2(const ComplexMatrix& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }
Vec2 to_vec2(const ComplexMatrix& v) { return {v(0, 0), v(1, 0)}; }

Vec2 mul(const Mat2& m, const Vec2& v) {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

void require_photons(int photons) {
  if (photons < 1 || photons > 4) {
    throw std::invalid_argument("photon number must be in 1..4, got " + std::to_string(photons));
  }
}

}  // namespace

std::size_t eve_parameter_count(int photons) {
  require_photons(photons);
  return photons == 4 ? 16 : 4u << (photons - 1);
}

std::size_t eve_block_index(int photons, std::span<const int> bits) {
  require_photons(photons);
  if (bits.size() != static_cast<std::size_t>(photons - 1)) {
    throw std::invalid_argument("eve_block_index: expected photons-1 bits");
  }
  std::size_t index = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument("eve_block_index: bits must be 0 or 1");
    index = photons == 4 ? index + b : (index << 1) | static_cast<std::size_t>(b);
  }
  return index;
}

ComplexMatrix filtered_state(const ProtocolSpec& spec, int photons, std::span<const Complex> eve) {
  if (eve.size() != eve_parameter_count(photons)) {
    throw std::invalid_argument("filtered_state: parameter vector has wrong length");
  }
  const Mat2 filter = to_mat2(spec.filter);
  const std::array<Vec2, 2> phi = {to_vec2(spec.phi0), to_vec2(spec.phi1)};
  const Vec2 z0 = to_vec2(qubit::ket_0z());
  const Vec2 z1 = to_vec2(qubit::ket_1z());
  const std::size_t kept = static_cast<std::size_t>(photons - 1);
  const std::size_t multi_indices = std::size_t{1} << kept;

  ComplexMatrix rho(4, 4);
  std::array<int, 3> bits{};
  for (const ComplexMatrix& rotation : spec.rotations) {
    const Mat2 u = to_mat2(rotation);
    const Mat2 u_inv = to_mat2(rotation.adjoint());
    const std::array<Vec2, 2> rotated = {mul(u, phi[0]), mul(u, phi[1])};

    // Effective operator on Bob's photon for each branch j, coherently summed
    // over Eve's input multi-index with amplitude prod_i <u_i|U|phi_j>.
    std::array<Mat2, 2> effective{};
    for (std::size_t m = 0; m < multi_indices; ++m) {
      for (std::size_t i = 0; i < kept; ++i) bits[i] = static_cast<int>((m >> (kept - 1 - i)) & 1u);
      const std::size_t block = eve_block_index(photons, std::span<const int>(bits.data(), kept));
      for (int j = 0; j < 2; ++j) {
        Complex amp = 1.0;
        for (std::size_t i = 0; i < kept; ++i) amp *= rotated[j][bits[i]];
        for (int e = 0; e < 4; ++e) effective[j][e] += amp * eve[4 * block + e];
      }
    }

    std::array<Vec2, 2> bob{};
    for (int j = 0; j < 2; ++j) bob[j] = mul(filter, mul(u_inv, mul(effective[j], rotated[j])));

    std::array<Complex, 4> v{};
    const double h = 1.0 / std::numbers::sqrt2;
    for (int b = 0; b < 2; ++b) {
      v[b] += h * z0[0] * bob[0][b];
      v[2 + b] += h * z0[1] * bob[0][b];
      v[b] += h * z1[0] * bob[1][b];
      v[2 + b] += h * z1[1] * bob[1][b];
    }
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) rho(r, c) += v[r] * std::conj(v[c]);
    }
  }
  return rho;
}

AttackProbabilities attack_probabilities(const ProtocolSpec& spec, int photons,
                                         std::span<const Complex> eve) {
  static const std::array<ComplexMatrix, 4> bell = bell_vectors();
  const ComplexMatrix rho = filtered_state(spec, photons, eve);
  auto overlap = [&](BellState s) {
    const ComplexMatrix& b = bell[static_cast<int>(s)];
    return inner(b, rho * b).real();
  };
  const double px = overlap(BellState::PsiPlus);
  const double pz = overlap(BellState::PhiMinus);
  const double py = overlap(BellState::PsiMinus);
  return {rho.trace().real(), px + py, pz + py, py};
}

QuadraticForms extract_forms(const ProtocolSpec& spec, int photons) {
  const std::size_t dim = eve_parameter_count(photons);
  QuadraticForms forms{photons, dim, ComplexMatrix(dim, dim), ComplexMatrix(dim, dim),
                       ComplexMatrix(dim, dim), ComplexMatrix(dim, dim)};
  std::array<ComplexMatrix*, 4> targets = {&forms.a_fil, &forms.a_bit, &forms.a_ph, &forms.a_y};
  auto values = [&](const std::vector<Complex>& a) {
    const AttackProbabilities p = attack_probabilities(spec, photons, a);
    return std::array<double, 4>{p.p_fil, p.p_bit, p.p_ph, p.p_y};
  };

  std::vector<std::array<double, 4>> diag(dim);
  std::vector<Complex> a(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    a[i] = 1.0;
    diag[i] = values(a);
    a[i] = 0.0;
    for (int q = 0; q < 4; ++q) (*targets[q])(i, i) = diag[i][q];
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      a[i] = 1.0;
      a[j] = 1.0;
      const auto real_probe = values(a);
      a[j] = Complex(0.0, 1.0);
      const auto imag_probe = values(a);
      a[i] = 0.0;
      a[j] = 0.0;
      for (int q = 0; q < 4; ++q) {
        // p(e_i + e_j) = M_ii + M_jj + 2 Re M_ij;  p(e_i + i e_j) = M_ii + M_jj - 2 Im M_ij
        const double re = 0.5 * (real_probe[q] - diag[i][q] - diag[j][q]);
        const double im = -0.5 * (imag_probe[q] - diag[i][q] - diag[j][q]);
        (*targets[q])(i, j) = Complex(re, im);
        (*targets[q])(j, i) = Complex(re, -im);
      }
    }
  }
  return forms;
}

double quadratic_value(const ComplexMatrix& form, std::span<const Complex> a) {
  if (!form.is_square() || form.rows() != a.size()) {
    throw std::invalid_argument("quadratic_value: dimension mismatch");
  }
  Complex sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Complex row = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) row += form(i, j) * a[j];
    sum += std::conj(a[i]) * row;
  }
  return sum.real();
}

std::optional<double> y_of_x(const QuadraticForms& forms, double x) {
  if (x < 0.0) throw std::invalid_argument("y_of_x: x must be non-negative");
  return max_generalized_eigenvalue(forms.a_ph - x * forms.a_bit, forms.a_fil);
}

ErrorRelation::ErrorRelation(SargVariant variant, QuadraticForms forms)
    : variant_(variant),
      forms_(std::move(forms)),
      fil_solver_(forms_.a_fil),
      ph_(fil_solver_.project(forms_.a_ph)),
      bit_(fil_solver_.project(forms_.a_bit)) {
  for (int i = 0; i < kScanPoints; ++i) scan_.push_back(y_of_x(kMaxSlope * i / (kScanPoints - 1)));
  const GeneralizedEigenSolver bit_solver(forms_.a_bit);
  // max{ x : A_Y - x A_bit >= 0 } = -min{ y : y A_bit + A_Y >= 0 }
  const auto lo = bit_solver.max_eigenvalue(-1.0 * forms_.a_y);
  const auto hi = bit_solver.max_eigenvalue(forms_.a_y);
  if (!lo || !hi) throw std::runtime_error("correlation interval is infeasible");
  a_lo_ = -*lo;
  a_hi_ = *hi;
}

ErrorRelation ErrorRelation::derive(const ProtocolSpec& spec, int photons) {
  if (photons > spec.max_photons()) {
    throw std::invalid_argument(std::string(to_string(spec.variant)) + " supports at most " +
                                std::to_string(spec.max_photons()) + " photons");
  }
  ErrorRelation relation(spec.variant, extract_forms(spec, photons));
  if (!relation.y_of_x(kMaxSlope)) {
    throw std::runtime_error("phase-error bound is infeasible for every slope");
  }
  return relation;
}

std::optional<double> ErrorRelation::y_of_x(double x) const {
  if (x < 0.0) throw std::invalid_argument("y_of_x: x must be non-negative");
  ProjectedNumerator num = bit_;
  num *= -x;
  num += ph_;
  return fil_solver_.max_eigenvalue(num);
}

BoundPoint ErrorRelation::optimum(double e_b) const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto objective = [&](double x) {
    const auto y = y_of_x(x);
    return y ? x * e_b + *y : kInf;
  };
  const double step = kMaxSlope / (kScanPoints - 1);
  int best = -1;
  double best_value = kInf;
  for (int i = 0; i < kScanPoints; ++i) {
    if (!scan_[i]) continue;
    const double v = step * i * e_b + *scan_[i];
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0) throw std::runtime_error("phase-error bound is infeasible");

  const double lo = step * std::max(0, best - 1);
  const double hi = step * std::min(kScanPoints - 1, best + 1);
  ScalarOptimum refined = golden_section_minimize(objective, lo, hi, 1e-10);
  if (best_value <= refined.value) refined = {step * best, best_value};
  const double y = *y_of_x(refined.argument);
  return {refined.argument, y, refined.argument * e_b + y};
}

std::optional<AttackSample> sample_from_parameters(const ProtocolSpec& spec, int photons,
                                                   std::span<const Complex> eve) {
  const AttackProbabilities p = attack_probabilities(spec, photons, eve);
  if (p.p_fil < kMinFilterProbability) return std::nullopt;
  return AttackSample{p.p_bit / p.p_fil, p.p_ph / p.p_fil, p.p_y / p.p_fil, p.p_fil};
}

namespace {

std::vector<Complex> draw_parameters(std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0 / std::numbers::sqrt2);
  std::vector<Complex> a(count);
  for (auto& z : a) {
    const double re = gauss(rng);
    z = Complex(re, gauss(rng));
  }
  return a;
}

}  // namespace

std::vector<Complex> random_attack_parameters(int photons, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return draw_parameters(eve_parameter_count(photons), rng);
}

AttackSample random_attack_sample(const ProtocolSpec& spec, int photons, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t count = eve_parameter_count(photons);
  while (true) {
    const auto a = draw_parameters(count, rng);
    if (auto sample = sample_from_parameters(spec, photons, a)) return *sample;
  }
}

std::vector<Complex> certificate_attack(const ErrorRelation& relation, double e_b) {
  const QuadraticForms& f = relation.forms();
  const BoundPoint opt = relation.optimum(e_b);
  const ComplexMatrix certificate = opt.x * f.a_bit + opt.y * f.a_fil - f.a_ph;
  const EigenDecomposition eig = hermitian_eigen(certificate);

  std::vector<std::size_t> null_cols;
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    if (std::abs(eig.values[j]) <= 1e-8) null_cols.push_back(j);
  }
  if (null_cols.empty()) throw std::runtime_error("certificate has no null direction");

  ComplexMatrix basis(f.dim, null_cols.size());
  for (std::size_t c = 0; c < null_cols.size(); ++c) {
    for (std::size_t r = 0; r < f.dim; ++r) basis(r, c) = eig.vectors(r, null_cols[c]);
  }
  const ComplexMatrix fil_on_null = basis.adjoint() * f.a_fil * basis;
  ComplexMatrix sym = 0.5 * (fil_on_null + fil_on_null.adjoint());
  const EigenDecomposition top = hermitian_eigen(sym);

  ComplexMatrix w(null_cols.size(), 1);
  for (std::size_t i = 0; i < null_cols.size(); ++i) w(i, 0) = top.vectors(i, null_cols.size() - 1);
  const ComplexMatrix a = basis * w;
  return {a.entries().begin(), a.entries().end()};
}

SoundnessReport check_soundness(const ProtocolSpec& spec, const ErrorRelation& relation,
                                std::uint64_t seed, std::size_t samples, unsigned threads) {
  // The bound is concave in e_b, so chords between grid nodes lie below it.
  // Samples clearly under the chord skip the exact minimization.
  constexpr int kGrid = 256;
  constexpr double kExactMargin = 1e-3;
  std::vector<double> grid(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) grid[i] = relation.bound(static_cast<double>(i) / kGrid);
  auto chord = [&](double e_b) {
    const double t = std::clamp(e_b, 0.0, 1.0) * kGrid;
    const int i = std::min(kGrid - 1, static_cast<int>(t));
    return grid[i] + (t - i) * (grid[i + 1] - grid[i]);
  };

  const int photons = relation.photons();
  auto run = [&](std::size_t begin, std::size_t end) {
    SoundnessReport local;
    for (std::size_t i = begin; i < end; ++i) {
      const AttackSample s = random_attack_sample(spec, photons, seed + i);
      double gap = chord(s.e_b) - s.e_p;
      if (gap < kExactMargin) gap = relation.bound(s.e_b) - s.e_p;
      local.worst_bound_excess = std::max(local.worst_bound_excess, -gap);
      local.tightest_gap = std::min(local.tightest_gap, gap);
      local.worst_a_low_excess = std::max(local.worst_a_low_excess, relation.a_lo_coeff() * s.e_b - s.a);
      local.worst_a_high_excess = std::max(local.worst_a_high_excess, s.a - relation.a_hi_coeff() * s.e_b);
      ++local.samples;
    }
    return local;
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(samples, 1)));
  std::vector<SoundnessReport> partial(threads);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = samples * t / threads;
    const std::size_t end = samples * (t + 1) / threads;
    workers.emplace_back([&, t, begin, end] { partial[t] = run(begin, end); });
  }
  for (auto& w : workers) w.join();

  SoundnessReport total;
  for (const auto& p : partial) {
    total.samples += p.samples;
    total.worst_bound_excess = std::max(total.worst_bound_excess, p.worst_bound_excess);
    total.worst_a_low_excess = std::max(total.worst_a_low_excess, p.worst_a_low_excess);
    total.worst_a_high_excess = std::max(total.worst_a_high_excess, p.worst_a_high_excess);
    total.tightest_gap = std::min(total.tightest_gap, p.tightest_gap);
  }
  return total;
}

}  // namespace mpqkd
