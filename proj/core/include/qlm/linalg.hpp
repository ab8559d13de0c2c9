#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Validation tolerances for DensityMatrix.
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPsdTolerance = -1e-10;
// Eigenvalues below this are treated as zero (entropy, square roots) or
// raised to it (refactorization).
inline constexpr double kEigenvalueFloor = 1e-12;
inline constexpr std::size_t kDefaultTensorCap = 4096;

/// Unit-norm real amplitude vector, e.g. a superposition of sememe basis
/// states.
class PureStateVector {
 public:
  /// Throws DomainError unless | ||amplitudes|| - 1 | <= 1e-12.
  explicit PureStateVector(Vector amplitudes);

  /// Rescales to unit norm. Throws DomainError on the zero vector.
  static PureStateVector normalized(Vector amplitudes);
  /// The computational basis vector e_index of dimension `dim`.
  static PureStateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

 private:
  Vector amplitudes_;
};

struct MixtureComponent {
  double probability;
  PureStateVector state;
};

/// Real symmetric PSD trace-one matrix. Construction only checks the shape;
/// call check_density()/validate() for the numeric invariants.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(const PureStateVector& state);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix entries_;
};

struct DensityCheck {
  double symmetry_error = 0.0;  // max |rho_ij - rho_ji|
  double trace_error = 0.0;     // |Tr rho - 1|
  double min_eigenvalue = 0.0;

  bool ok() const noexcept {
    return symmetry_error <= kSymmetryTolerance && trace_error <= kTraceTolerance &&
           min_eigenvalue >= kPsdTolerance;
  }
};

DensityCheck check_density(const DensityMatrix& rho);
/// Throws DomainError describing the first violated invariant.
void validate(const DensityMatrix& rho);

/// Lower-triangular factor with nonnegative diagonal, stored as the packed
/// row-major lower triangle: (0,0), (1,0), (1,1), (2,0), ...
class CholeskyFactor {
 public:
  /// All-zero factor.
  explicit CholeskyFactor(std::size_t dim);
  /// Throws DomainError on a wrong parameter count or a negative diagonal.
  CholeskyFactor(std::size_t dim, std::vector<double> packed);

  static CholeskyFactor identity(std::size_t dim);
  /// Packs the lower triangle of `lower`; the strict upper triangle is ignored.
  static CholeskyFactor from_lower(const Matrix& lower);

  static constexpr std::size_t param_count(std::size_t dim) noexcept {
    return dim * (dim + 1) / 2;
  }
  static constexpr std::size_t index(std::size_t row, std::size_t col) noexcept {
    return row * (row + 1) / 2 + col;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> params() const noexcept { return packed_; }
  double at(std::size_t row, std::size_t col) const { return packed_[index(row, col)]; }
  Matrix lower() const;

 private:
  std::size_t dim_;
  std::vector<double> packed_;
};

/// sum_i p_i |psi_i><psi_i|.
DensityMatrix density_from_mixture(std::span<const MixtureComponent> components);

/// L L^T / Tr(L L^T). Throws DomainError for an all-zero factor.
DensityMatrix cholesky_to_density(const CholeskyFactor& factor);
/// Same, straight from packed parameters (used by the embedding store).
DensityMatrix cholesky_to_density(std::span<const double> packed, std::size_t dim);

/// Factor L with L L^T / Tr(L L^T) ~= rho. Eigenvalues below `eig_floor` are
/// raised to it first, so rank-deficient inputs factor cleanly.
CholeskyFactor density_to_cholesky(const DensityMatrix& rho, double eig_floor = kEigenvalueFloor);

/// Tr(rho sigma), the trace inner product. Coincides with fidelity whenever
/// one argument is pure.
double hs_similarity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, evaluated as the
/// squared nuclear norm of sqrt(rho) sqrt(sigma).
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

enum class LogBase { natural, two };

/// Ascending eigenvalues of the symmetrized matrix.
Vector eigenvalues(const DensityMatrix& rho);

/// -sum p log p with p clamped to [0, 1] and 0 log 0 = 0.
double shannon_entropy(std::span<const double> probabilities, LogBase base = LogBase::natural);

/// S(rho) = -Tr(rho log rho), with Boltzmann's constant set to 1.
double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::natural);

/// Kronecker product rho (x) sigma. Throws DomainError when the product
/// dimension exceeds `size_cap`.
DensityMatrix tensor_product(const DensityMatrix& rho, const DensityMatrix& sigma,
                             std::size_t size_cap = kDefaultTensorCap);

enum class Subsystem { first, second };

/// Reduced state of a bipartite rho on C^d1 (x) C^d2, keeping `keep`.
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t d1, std::size_t d2,
                            Subsystem keep);

struct WeightedDensity {
  double weight;
  DensityMatrix state;
};

/// sum w_i rho_i / sum w_i. Weights must be nonnegative and not all zero.
DensityMatrix mixture_average(std::span<const WeightedDensity> weighted);

}  // namespace qlm
