#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "mpqkd/matrix.hpp"

namespace mpqkd {

// Qubit kets and operators are written in the {|0_x>, |1_x>} storage basis.
namespace qubit {

ComplexMatrix ket_0x();
ComplexMatrix ket_1x();
ComplexMatrix ket_0z();
ComplexMatrix ket_1z();

ComplexMatrix pauli_x();
ComplexMatrix pauli_z();
ComplexMatrix pauli_y();

/// 45 degree real rotation: cos(pi/4) I + sin(pi/4)(|1_x><0_x| - |0_x><1_x|).
ComplexMatrix rotation_r();
/// T_0 = I; T_1, T_2 are pi/2 rotations about (Z+X)/sqrt2 and (Z-X)/sqrt2.
ComplexMatrix rotation_t(int l);
/// sin(pi/8)|0_x><0_x| + cos(pi/8)|1_x><1_x|
ComplexMatrix filter();
/// cos(pi/8)|0_x> + (-1)^j sin(pi/8)|1_x>
ComplexMatrix signal_state(int j);

}  // namespace qubit

enum class SargVariant { FourState, SixState };

std::string_view to_string(SargVariant v);

struct RotationIndex {
  int l;
  int k;
};

struct ProtocolSpec {
  SargVariant variant;
  std::vector<ComplexMatrix> rotations;  // T_l R^k, ordered by (l, k)
  std::vector<RotationIndex> indices;
  ComplexMatrix filter;
  ComplexMatrix phi0;
  ComplexMatrix phi1;

  /// Largest photon number the protocol distills key from.
  int max_photons() const { return variant == SargVariant::SixState ? 4 : 2; }
};

ProtocolSpec build_protocol(SargVariant variant);

struct SourceState {
  int photons;
  ComplexMatrix amplitudes;  // on A (x) B^{(x) photons}, A first
};

/// (|0_z>_A |phi0>^{(x)nu} + |1_z>_A |phi1>^{(x)nu}) / sqrt2, nu in 1..4.
SourceState source_state(int photons);

enum class BellState { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

/// Z-basis Bell vectors and their projectors, indexed by BellState.
std::array<ComplexMatrix, 4> bell_vectors();
std::array<ComplexMatrix, 4> bell_projectors();

}  // namespace mpqkd
