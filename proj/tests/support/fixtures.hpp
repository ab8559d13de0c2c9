#pragma once

// Test-only generators and independent reference computations.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qlm/linalg.hpp"
#include "qlm/model.hpp"
#include "qlm/random.hpp"

namespace qlm::testing {

inline std::vector<double> random_packed(std::size_t dim, Rng& rng) {
  std::vector<double> p(CholeskyFactor::param_count(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      p[CholeskyFactor::index(i, j)] = i == j ? std::abs(normal01(rng)) : normal01(rng);
  return p;
}

inline CholeskyFactor random_factor(std::size_t dim, Rng& rng) {
  return CholeskyFactor(dim, random_packed(dim, rng));
}

inline DensityMatrix random_density(std::size_t dim, Rng& rng) {
  return cholesky_to_density(random_factor(dim, rng));
}

/// Random state of rank `rank` (mixture of `rank` random pure states).
inline DensityMatrix random_low_rank(std::size_t dim, std::size_t rank, Rng& rng) {
  Matrix b(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = normal01(rng);
  Matrix rho = b * b.transpose();
  return DensityMatrix(rho / rho.trace());
}

inline PureStateVector random_pure(std::size_t dim, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal01(rng);
  return PureStateVector::normalized(v);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }


/// -sum p ln p over explicitly supplied probabilities.
inline double entropy_of(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * std::log(x);
  return s;
}

/// Nested-loop Kronecker product.
inline Matrix kron_loops(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qlm-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace qlm::testing
