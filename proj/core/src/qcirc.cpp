#include "qlm/qcirc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qlm/errors.hpp"
#include "qlm/random.hpp"

namespace qlm::circuit {
namespace {

using Index = Eigen::Index;

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

StateVector::StateVector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(Vector::Zero(Index{1} << num_qubits)) {
  if (num_qubits > kMaxSwapTestQubits) {
    throw DomainError("state vector of " + std::to_string(num_qubits) + " qubits is too large");
  }
  amps_(0) = 1.0;
}

StateVector StateVector::from_amplitudes(Vector amplitudes) {
  const auto n = static_cast<std::size_t>(amplitudes.size());
  if (n == 0 || !std::has_single_bit(n)) {
    throw DomainError("state vector length must be a power of two");
  }
  if (std::abs(amplitudes.norm() - 1.0) > 1e-12) throw DomainError("state vector is not normalized");
  return StateVector(static_cast<std::size_t>(std::countr_zero(n)), std::move(amplitudes));
}

void StateVector::check_qubit(std::size_t q) const {
  if (q >= num_qubits_) {
    throw DomainError("qubit " + std::to_string(q) + " out of range for " +
                      std::to_string(num_qubits_) + "-qubit register");
  }
}

StateVector StateVector::tensor(const StateVector& other) const {
  const Index n1 = amps_.size();
  const Index n2 = other.amps_.size();
  Vector out(n1 * n2);
  for (Index i = 0; i < n1; ++i) out.segment(i * n2, n2) = amps_(i) * other.amps_;
  return StateVector(num_qubits_ + other.num_qubits_, std::move(out));
}

void StateVector::apply_hadamard(std::size_t qubit) {
  check_qubit(qubit);
  const Index mask = Index{1} << qubit;
  for (Index i = 0; i < amps_.size(); ++i) {
    if (i & mask) continue;
    const double a0 = amps_(i);
    const double a1 = amps_(i | mask);
    amps_(i) = kInvSqrt2 * (a0 + a1);
    amps_(i | mask) = kInvSqrt2 * (a0 - a1);
  }
}

void StateVector::apply_controlled_swap(std::size_t control, std::size_t a, std::size_t b) {
  check_qubit(control);
  check_qubit(a);
  check_qubit(b);
  if (control == a || control == b) throw DomainError("controlled swap: control overlaps target");
  if (a == b) return;
  const Index cm = Index{1} << control;
  const Index am = Index{1} << a;
  const Index bm = Index{1} << b;
  for (Index i = 0; i < amps_.size(); ++i) {
    // Visit each swapped pair once: from the index with a=1, b=0.
    if ((i & cm) && (i & am) && !(i & bm)) std::swap(amps_(i), amps_((i & ~am) | bm));
  }
}

double StateVector::probability_zero(std::size_t qubit) const {
  check_qubit(qubit);
  const Index mask = Index{1} << qubit;
  double p = 0.0;
  for (Index i = 0; i < amps_.size(); ++i)
    if (!(i & mask)) p += amps_(i) * amps_(i);
  return p;
}

std::size_t principal_qubits(std::size_t dim) {
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw DomainError("dimension " + std::to_string(dim) +
                      " is not a power of two; the circuit encoding needs d = 2^m");
  }
  return static_cast<std::size_t>(std::countr_zero(dim));
}

StateVector purify(const DensityMatrix& rho) {
  const std::size_t d = rho.dim();
  const std::size_t m = principal_qubits(d);
  if (m > kMaxPrincipalQubits) {
    throw DomainError("purification limited to " + std::to_string(kMaxPrincipalQubits) +
                      " principal qubits");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho.matrix() + rho.matrix().transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition did not converge");

  // Eigen returns ascending eigenvalues; the encoding lists them descending.
  std::vector<Index> order(d);
  std::iota(order.begin(), order.end(), Index{0});
  std::reverse(order.begin(), order.end());
  Vector p(static_cast<Index>(d));
  for (std::size_t k = 0; k < d; ++k) p(static_cast<Index>(k)) = std::max(0.0, solver.eigenvalues()(order[k]));
  const double total = p.sum();
  if (!(total > 0.0)) throw DomainError("cannot purify a matrix with no positive eigenvalue");
  p /= total;

  // amplitude(principal = r, ancilla = i) = sqrt(p_i) psi_i[r]
  const Index di = static_cast<Index>(d);
  Vector amps = Vector::Zero(di * di);
  for (Index i = 0; i < di; ++i) {
    const double w = std::sqrt(p(i));
    const auto psi = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    for (Index r = 0; r < di; ++r) amps(r * di + i) = w * psi(r);
  }
  amps /= amps.norm();
  return StateVector::from_amplitudes(std::move(amps));
}

DensityMatrix reduce_purification(const StateVector& phi, std::size_t dim) {
  const std::size_t m = principal_qubits(dim);
  if (phi.num_qubits() != 2 * m) {
    throw DimensionMismatch("state has " + std::to_string(phi.num_qubits()) +
                            " qubits; a purification of dimension " + std::to_string(dim) +
                            " has " + std::to_string(2 * m));
  }
  const Vector& a = phi.amplitudes();
  return partial_trace(DensityMatrix(a * a.transpose()), dim, dim, Subsystem::first);
}

double swap_test_exact(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("swap test: dimensions differ");
  const std::size_t m = principal_qubits(rho.dim());
  if (swap_test_qubits(rho.dim()) > kMaxSwapTestQubits) {
    throw DomainError("swap test limited to " + std::to_string(kMaxSwapTestQubits) +
                      " qubits (d <= 8)");
  }
  // Layout, high to low: control | rho principal | rho ancilla | sigma principal | sigma ancilla
  StateVector state = StateVector(1).tensor(purify(rho)).tensor(purify(sigma));
  const std::size_t control = 4 * m;
  state.apply_hadamard(control);
  for (std::size_t k = 0; k < m; ++k) state.apply_controlled_swap(control, 3 * m + k, m + k);
  state.apply_hadamard(control);
  return state.probability_zero(control);
}

ShotResult sample_bernoulli(double p, std::uint64_t shots, std::uint64_t seed) {
  const double q = std::clamp(p, 0.0, 1.0);
  Rng rng(seed);
  ShotResult r{shots, 0};
  for (std::uint64_t s = 0; s < shots; ++s)
    if (uniform01(rng) < q) ++r.zeros;
  return r;
}

ShotResult swap_test_sample(const DensityMatrix& rho, const DensityMatrix& sigma,
                            std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be at least 1");
  return sample_bernoulli(swap_test_exact(rho, sigma), shots, seed);
}

}  // namespace qlm::circuit
