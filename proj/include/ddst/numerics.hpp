// SPDX-License-Identifier: Apache-2.0
//
// Complex linear algebra and random-number primitives shared by every other
// module. Matrices are Eigen row-major complex<double>; 32-bit floats only
// appear at file boundaries.
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ddst {

using cplx = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

inline constexpr double kPi = 3.14159265358979323846;

/// Reproducible random stream identified by (seed, stream-id).
///
/// Two instances built from the same pair produce identical draws. A stream
/// is owned by one worker at a time; use derive() to hand out independent
/// child streams (per trial, per purpose) instead of sharing one.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Child stream keyed by `tag`; independent of the parent's draw position.
  [[nodiscard]] RngStream derive(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  std::uint8_t bit();
  std::uint64_t next_u64();

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to key derived streams.
std::uint64_t mix64(std::uint64_t x);

/// Solves A X = B for Hermitian positive-definite A via Cholesky.
/// Throws DimensionError on shape mismatch, NotPositiveDefinite otherwise.
ComplexMatrix hermitian_solve(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// `count` i.i.d. CN(0, variance) draws. Throws DomainError for variance < 0.
std::vector<cplx> complex_gaussian(std::size_t count, double variance,
                                   RngStream& rng);

/// (1/N) sum v v^H over the given vectors.
ComplexMatrix sample_covariance(std::span<const ComplexVector> vectors);

/// Streaming form of sample_covariance for pooled ensembles that would not
/// fit in memory as a list of vectors.
class CovarianceAccumulator {
public:
  explicit CovarianceAccumulator(Eigen::Index dim);
  void add(const ComplexVector& v);
  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& v) {
    check_size(v.size());
    sum_.noalias() += v * v.adjoint();
    ++count_;
  }
  std::size_t count() const { return count_; }
  ComplexMatrix covariance() const;

private:
  void check_size(Eigen::Index n) const;
  ComplexMatrix sum_;
  std::size_t count_ = 0;
};

double frobenius_norm2(const ComplexMatrix& a);

}  // namespace ddst
