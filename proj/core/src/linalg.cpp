#include "qlm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlm/errors.hpp"

namespace qlm {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(op) + ": dimensions differ (" + std::to_string(a.dim()) +
                            " vs " + std::to_string(b.dim()) + ")");
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Eigen::SelfAdjointEigenSolver<Matrix> eigensystem(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(rho.matrix()));
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigendecomposition did not converge");
  }
  return solver;
}

// Square root of a PSD matrix with eigenvalues below the floor sent to zero.
Matrix psd_sqrt(const DensityMatrix& rho) {
  const auto solver = eigensystem(rho);
  Vector roots = solver.eigenvalues().unaryExpr(
      [](double l) { return l > kEigenvalueFloor ? std::sqrt(l) : 0.0; });
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

// ---------------------------------------------------------------- PureStateVector

PureStateVector::PureStateVector(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw DomainError("pure state must have positive dimension");
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw DomainError("pure state is not normalized (norm " + std::to_string(norm) + ")");
  }
}

PureStateVector PureStateVector::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw DomainError("cannot normalize a zero vector");
  return PureStateVector(amplitudes / norm);
}

PureStateVector PureStateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DomainError("basis index out of range");
  Vector v = Vector::Zero(idx(dim));
  v(idx(index)) = 1.0;
  return PureStateVector(std::move(v));
}

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw DomainError("density matrix must be square with positive dimension");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  if (dim == 0) throw DomainError("dimension must be positive");
  return DensityMatrix(Matrix::Identity(idx(dim), idx(dim)) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const PureStateVector& state) {
  const Vector& a = state.amplitudes();
  return DensityMatrix(a * a.transpose());
}

DensityCheck check_density(const DensityMatrix& rho) {
  const Matrix& m = rho.matrix();
  DensityCheck check;
  check.symmetry_error = (m - m.transpose()).cwiseAbs().maxCoeff();
  check.trace_error = std::abs(m.trace() - 1.0);
  check.min_eigenvalue = eigenvalues(rho).minCoeff();
  return check;
}

void validate(const DensityMatrix& rho) {
  const DensityCheck c = check_density(rho);
  if (c.symmetry_error > kSymmetryTolerance) {
    throw DomainError("density matrix not symmetric (max asymmetry " +
                      std::to_string(c.symmetry_error) + ")");
  }
  if (c.trace_error > kTraceTolerance) {
    throw DomainError("density matrix trace deviates from 1 by " + std::to_string(c.trace_error));
  }
  if (c.min_eigenvalue < kPsdTolerance) {
    throw DomainError("density matrix not PSD (min eigenvalue " +
                      std::to_string(c.min_eigenvalue) + ")");
  }
}

// ---------------------------------------------------------------- CholeskyFactor

CholeskyFactor::CholeskyFactor(std::size_t dim) : dim_(dim), packed_(param_count(dim), 0.0) {
  if (dim == 0) throw DomainError("Cholesky factor dimension must be positive");
}

CholeskyFactor::CholeskyFactor(std::size_t dim, std::vector<double> packed)
    : dim_(dim), packed_(std::move(packed)) {
  if (dim == 0) throw DomainError("Cholesky factor dimension must be positive");
  if (packed_.size() != param_count(dim)) {
    throw DomainError("expected " + std::to_string(param_count(dim)) +
                      " lower-triangle parameters, got " + std::to_string(packed_.size()));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(packed_[index(i, i)] >= 0.0)) {
      throw DomainError("Cholesky diagonal entry " + std::to_string(i) + " is negative");
    }
  }
}

CholeskyFactor CholeskyFactor::identity(std::size_t dim) {
  CholeskyFactor f(dim);
  for (std::size_t i = 0; i < dim; ++i) f.packed_[index(i, i)] = 1.0;
  return f;
}

CholeskyFactor CholeskyFactor::from_lower(const Matrix& lower) {
  if (lower.rows() != lower.cols()) throw DomainError("factor must be square");
  const auto d = static_cast<std::size_t>(lower.rows());
  std::vector<double> packed(param_count(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) packed[index(i, j)] = lower(idx(i), idx(j));
  return CholeskyFactor(d, std::move(packed));
}

Matrix CholeskyFactor::lower() const {
  Matrix m = Matrix::Zero(idx(dim_), idx(dim_));
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(idx(i), idx(j)) = at(i, j);
  return m;
}

// ---------------------------------------------------------------- operations

DensityMatrix density_from_mixture(std::span<const MixtureComponent> components) {
  if (components.empty()) throw DomainError("mixture has no components");
  const std::size_t d = components.front().state.dim();
  double total = 0.0;
  Matrix rho = Matrix::Zero(idx(d), idx(d));
  for (const auto& c : components) {
    if (c.state.dim() != d) throw DimensionMismatch("mixture states have different dimensions");
    if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
      throw DomainError("mixture probability outside [0, 1]");
    }
    const Vector& a = c.state.amplitudes();
    rho.noalias() += c.probability * (a * a.transpose());
    total += c.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("mixture probabilities sum to " + std::to_string(total) + ", not 1");
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix cholesky_to_density(std::span<const double> packed, std::size_t dim) {
  if (packed.size() != CholeskyFactor::param_count(dim)) {
    throw DomainError("packed factor has wrong parameter count");
  }
  double trace = 0.0;
  for (double v : packed) trace += v * v;
  if (!(trace > 0.0)) throw DomainError("all-zero Cholesky factor has no density");

  // Row i of L occupies packed[i(i+1)/2 .. i(i+1)/2 + i]. Filling (i,j) and
  // (j,i) from one sum keeps the result exactly symmetric.
  Matrix rho(idx(dim), idx(dim));
  const double inv = 1.0 / trace;
  for (std::size_t i = 0; i < dim; ++i) {
    const double* li = packed.data() + CholeskyFactor::index(i, 0);
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = packed.data() + CholeskyFactor::index(j, 0);
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += li[k] * lj[k];
      rho(idx(i), idx(j)) = rho(idx(j), idx(i)) = s * inv;
    }
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix cholesky_to_density(const CholeskyFactor& factor) {
  return cholesky_to_density(factor.params(), factor.dim());
}

CholeskyFactor density_to_cholesky(const DensityMatrix& rho, double eig_floor) {
  if (eig_floor < 0.0) throw DomainError("eigenvalue floor must be nonnegative");
  const Matrix& m = rho.matrix();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw DomainError("cannot factor a non-symmetric matrix (max asymmetry " +
                      std::to_string(asym) + ")");
  }
  if (std::abs(m.trace() - 1.0) > 1e-6) {
    throw DomainError("cannot factor: trace deviates from 1 by " +
                      std::to_string(std::abs(m.trace() - 1.0)));
  }

  // rho' = B B^T with B = V sqrt(Lambda). QR of B^T gives rho' = R^T R, so
  // R^T is a lower factor even when rho' is (near) singular.
  const auto solver = eigensystem(rho);
  const Vector roots =
      solver.eigenvalues().unaryExpr([&](double l) { return std::sqrt(std::max(l, eig_floor)); });
  const Matrix bt = (solver.eigenvectors() * roots.asDiagonal()).transpose();
  Eigen::HouseholderQR<Matrix> qr(bt);
  Matrix lower = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();

  // Flipping the sign of a column leaves L L^T unchanged.
  for (Index j = 0; j < lower.cols(); ++j) {
    if (lower(j, j) < 0.0) lower.col(j) *= -1.0;
  }
  return CholeskyFactor::from_lower(lower);
}

double hs_similarity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "hs_similarity");
  // Tr(A B) for symmetric A, B is the elementwise product sum.
  return rho.matrix().cwiseProduct(sigma.matrix()).sum();
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "uhlmann_fidelity");
  const Matrix product = psd_sqrt(rho) * psd_sqrt(sigma);
  Eigen::JacobiSVD<Matrix> svd(product);
  const double nuclear = svd.singularValues().sum();
  return std::clamp(nuclear * nuclear, 0.0, 1.0);
}

Vector eigenvalues(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(rho.matrix()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigendecomposition did not converge");
  }
  return solver.eigenvalues();
}

double shannon_entropy(std::span<const double> probabilities, LogBase base) {
  double s = 0.0;
  for (double p : probabilities) {
    const double q = std::clamp(p, 0.0, 1.0);
    if (q > 0.0) s -= q * std::log(q);
  }
  return base == LogBase::two ? s / std::log(2.0) : s;
}

double von_neumann_entropy(const DensityMatrix& rho, LogBase base) {
  const Vector ev = eigenvalues(rho);
  return shannon_entropy(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())),
                         base);
}

DensityMatrix tensor_product(const DensityMatrix& rho, const DensityMatrix& sigma,
                             std::size_t size_cap) {
  const std::size_t d1 = rho.dim();
  const std::size_t d2 = sigma.dim();
  if (d1 * d2 > size_cap) {
    throw DomainError("tensor product dimension " + std::to_string(d1 * d2) + " exceeds cap " +
                      std::to_string(size_cap));
  }
  Matrix out(idx(d1 * d2), idx(d1 * d2));
  for (Index i = 0; i < idx(d1); ++i)
    for (Index j = 0; j < idx(d1); ++j)
      out.block(i * idx(d2), j * idx(d2), idx(d2), idx(d2)) = rho.matrix()(i, j) * sigma.matrix();
  return DensityMatrix(std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t d1, std::size_t d2,
                            Subsystem keep) {
  if (d1 == 0 || d2 == 0 || d1 * d2 != rho.dim()) {
    throw DomainError("subsystem dims " + std::to_string(d1) + "x" + std::to_string(d2) +
                      " do not factor dimension " + std::to_string(rho.dim()));
  }
  const Matrix& m = rho.matrix();
  const Index a = idx(d1), b = idx(d2);
  if (keep == Subsystem::first) {
    Matrix out = Matrix::Zero(a, a);
    for (Index i = 0; i < a; ++i)
      for (Index k = 0; k < a; ++k) out(i, k) = m.block(i * b, k * b, b, b).trace();
    return DensityMatrix(std::move(out));
  }
  Matrix out = Matrix::Zero(b, b);
  for (Index i = 0; i < a; ++i) out += m.block(i * b, i * b, b, b);
  return DensityMatrix(std::move(out));
}

DensityMatrix mixture_average(std::span<const WeightedDensity> weighted) {
  if (weighted.empty()) throw DomainError("mixture_average of an empty list");
  const std::size_t d = weighted.front().state.dim();
  double total = 0.0;
  Matrix acc = Matrix::Zero(idx(d), idx(d));
  for (const auto& w : weighted) {
    if (w.state.dim() != d) throw DimensionMismatch("mixture_average: dimensions differ");
    if (!(w.weight >= 0.0)) throw DomainError("mixture_average: negative weight");
    acc += w.weight * w.state.matrix();
    total += w.weight;
  }
  if (!(total > 0.0)) throw DomainError("mixture_average: all weights are zero");
  return DensityMatrix(acc / total);
}

}  // namespace qlm
