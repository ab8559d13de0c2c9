#pragma once

#include <cstddef>
#include <cstdint>

#include "qlm/linalg.hpp"

// Exact real-amplitude simulation of the purification encoding of a density
// matrix and of the swap test between two encoded states.
namespace qlm::circuit {

// Purifications of up to 2^6-dimensional states (12 qubits).
inline constexpr std::size_t kMaxPrincipalQubits = 6;
// Swap tests run two purifications plus a control: 4m + 1 <= 13, i.e. m <= 3.
inline constexpr std::size_t kMaxSwapTestQubits = 13;

/// Real state vector on q qubits. Qubit k is bit k of the basis index, so the
/// first factor of a tensor product occupies the high bits.
class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(std::size_t num_qubits);
  /// Throws DomainError unless the length is 2^q and the norm is 1 (1e-12).
  static StateVector from_amplitudes(Vector amplitudes);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const Vector& amplitudes() const noexcept { return amps_; }

  /// this (x) other, `this` on the high qubits.
  StateVector tensor(const StateVector& other) const;

  void apply_hadamard(std::size_t qubit);
  /// Fredkin gate: swaps qubits a and b where `control` is 1.
  void apply_controlled_swap(std::size_t control, std::size_t a, std::size_t b);

  /// Probability of measuring `qubit` in |0>.
  double probability_zero(std::size_t qubit) const;

 private:
  StateVector(std::size_t num_qubits, Vector amps) : num_qubits_(num_qubits), amps_(std::move(amps)) {}
  void check_qubit(std::size_t q) const;

  std::size_t num_qubits_;
  Vector amps_;
};

/// log2(d); throws DomainError unless d = 2^m with m >= 1.
std::size_t principal_qubits(std::size_t dim);

/// Qubits a purification of a d-dimensional state uses: 2 log2(d).
inline std::size_t purification_qubits(std::size_t dim) { return 2 * principal_qubits(dim); }

/// |Phi> = sum_i sqrt(p_i) |psi_i> (x) |i>, the principal register on the high
/// qubits and the ancilla index |i> on the low qubits. (p_i, psi_i) is the
/// eigendecomposition of rho, descending, negatives clamped and renormalized.
StateVector purify(const DensityMatrix& rho);

/// Traces the ancilla register out of a purification of a d-dimensional state.
DensityMatrix reduce_purification(const StateVector& phi, std::size_t dim);

/// Simulates H - CSWAP(principal registers) - H on |0> (x) purify(rho) (x)
/// purify(sigma) and returns P(control = 0) = (1 + Tr(rho sigma)) / 2.
double swap_test_exact(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Total qubits used by swap_test_exact for d-dimensional inputs.
inline std::size_t swap_test_qubits(std::size_t dim) { return 2 * purification_qubits(dim) + 1; }

struct ShotResult {
  std::uint64_t shots = 0;
  std::uint64_t zeros = 0;
  double estimate() const noexcept {
    return shots == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(shots);
  }
};

/// `shots` Bernoulli draws with success probability p (clamped to [0, 1]).
ShotResult sample_bernoulli(double p, std::uint64_t shots, std::uint64_t seed);

/// Measures the swap-test control `shots` times. Throws DomainError if shots < 1.
ShotResult swap_test_sample(const DensityMatrix& rho, const DensityMatrix& sigma,
                            std::uint64_t shots, std::uint64_t seed);

}  // namespace qlm::circuit
