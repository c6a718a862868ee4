#include "mpqkd/protocol.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpqkd {

namespace qubit {

namespace {
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kCos8 = std::cos(std::numbers::pi / 8.0);
const double kSin8 = std::sin(std::numbers::pi / 8.0);

ComplexMatrix ket(Complex a, Complex b) { return ComplexMatrix(2, 1, {a, b}); }
ComplexMatrix op(Complex a, Complex b, Complex c, Complex d) { return ComplexMatrix(2, 2, {a, b, c, d}); }
}  // namespace

ComplexMatrix ket_0x() { return ket(1.0, 0.0); }
ComplexMatrix ket_1x() { return ket(0.0, 1.0); }
ComplexMatrix ket_0z() { return ket(kInvSqrt2, kInvSqrt2); }
ComplexMatrix ket_1z() { return ket(kInvSqrt2, -kInvSqrt2); }

ComplexMatrix pauli_x() { return op(1.0, 0.0, 0.0, -1.0); }
ComplexMatrix pauli_z() { return op(0.0, 1.0, 1.0, 0.0); }
ComplexMatrix pauli_y() { return Complex(0.0, 1.0) * (pauli_x() * pauli_z()); }

ComplexMatrix rotation_r() {
  const double c = std::cos(std::numbers::pi / 4.0);
  const double s = std::sin(std::numbers::pi / 4.0);
  return op(c, -s, s, c);
}

ComplexMatrix rotation_t(int l) {
  const double c = std::cos(std::numbers::pi / 4.0);
  const double s = std::sin(std::numbers::pi / 4.0);
  const ComplexMatrix identity = ComplexMatrix::identity(2);
  switch (l) {
    case 0:
      return identity;
    case 1:
      return c * identity + Complex(0.0, -s * kInvSqrt2) * (pauli_z() + pauli_x());
    case 2:
      return c * identity + Complex(0.0, -s * kInvSqrt2) * (pauli_z() - pauli_x());
    default:
      throw std::invalid_argument("rotation_t: l must be 0, 1 or 2");
  }
}

ComplexMatrix filter() { return op(kSin8, 0.0, 0.0, kCos8); }

ComplexMatrix signal_state(int j) {
  if (j != 0 && j != 1) throw std::invalid_argument("signal_state: j must be 0 or 1");
  return ket(kCos8, j == 0 ? kSin8 : -kSin8);
}

}  // namespace qubit

std::string_view to_string(SargVariant v) {
  return v == SargVariant::SixState ? "six-state" : "four-state";
}

ProtocolSpec build_protocol(SargVariant variant) {
  ProtocolSpec spec{variant, {}, {}, qubit::filter(), qubit::signal_state(0), qubit::signal_state(1)};
  const int l_count = variant == SargVariant::SixState ? 3 : 1;
  const ComplexMatrix r = qubit::rotation_r();
  for (int l = 0; l < l_count; ++l) {
    ComplexMatrix rk = ComplexMatrix::identity(2);
    for (int k = 0; k < 4; ++k) {
      spec.rotations.push_back(qubit::rotation_t(l) * rk);
      spec.indices.push_back({l, k});
      rk = r * rk;
    }
  }
  return spec;
}

SourceState source_state(int photons) {
  if (photons < 1 || photons > 4) {
    throw std::invalid_argument("source_state: photon number must be in 1..4, got " +
                                std::to_string(photons));
  }
  ComplexMatrix b0 = qubit::signal_state(0);
  ComplexMatrix b1 = qubit::signal_state(1);
  for (int i = 1; i < photons; ++i) {
    b0 = tensor(b0, qubit::signal_state(0));
    b1 = tensor(b1, qubit::signal_state(1));
  }
  ComplexMatrix psi = tensor(qubit::ket_0z(), b0) + tensor(qubit::ket_1z(), b1);
  psi *= 1.0 / std::numbers::sqrt2;
  return {photons, std::move(psi)};
}

std::array<ComplexMatrix, 4> bell_vectors() {
  const ComplexMatrix z00 = tensor(qubit::ket_0z(), qubit::ket_0z());
  const ComplexMatrix z01 = tensor(qubit::ket_0z(), qubit::ket_1z());
  const ComplexMatrix z10 = tensor(qubit::ket_1z(), qubit::ket_0z());
  const ComplexMatrix z11 = tensor(qubit::ket_1z(), qubit::ket_1z());
  const double h = 1.0 / std::numbers::sqrt2;
  return {h * (z00 + z11), h * (z00 - z11), h * (z01 + z10), h * (z01 - z10)};
}

std::array<ComplexMatrix, 4> bell_projectors() {
  const auto v = bell_vectors();
  return {projector(v[0]), projector(v[1]), projector(v[2]), projector(v[3])};
}

}  // namespace mpqkd
