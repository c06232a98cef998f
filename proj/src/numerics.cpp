// SPDX-License-Identifier: Apache-2.0
#include "ddst/numerics.hpp"

#include <cmath>
#include <string>

#include "ddst/error.hpp"

namespace ddst {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(stream ^ 0x6a09e667f3bcc909ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

RngStream RngStream::derive(std::uint64_t tag) const {
  return RngStream(seed_, mix64(stream_ * 0x100000001b3ULL + mix64(tag)));
}

double RngStream::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

std::uint8_t RngStream::bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

std::uint64_t RngStream::next_u64() { return engine_(); }

ComplexMatrix hermitian_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError("hermitian_solve: A must be square and non-empty, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (b.rows() != a.rows()) {
    throw DimensionError("hermitian_solve: B has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(a.rows()));
  }
  const double scale = a.cwiseAbs().maxCoeff();
  if (!((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0))) {
    throw NotPositiveDefinite("hermitian_solve: A is not Hermitian");
  }
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("hermitian_solve: A is not positive definite");
  }
  // LLT accepts some semi-definite inputs with a zero pivot; reject those.
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotPositiveDefinite("hermitian_solve: A is singular");
    }
  }
  return llt.solve(b);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::vector<cplx> complex_gaussian(std::size_t count, double variance, RngStream& rng) {
  if (!(variance >= 0.0)) {
    throw DomainError("complex_gaussian: variance must be non-negative");
  }
  const double s = std::sqrt(variance / 2.0);
  std::vector<cplx> out(count);
  for (auto& w : out) {
    const double re = rng.normal();
    const double im = rng.normal();
    w = cplx(s * re, s * im);
  }
  return out;
}

ComplexMatrix sample_covariance(std::span<const ComplexVector> vectors) {
  if (vectors.empty()) {
    throw DimensionError("sample_covariance: empty input");
  }
  CovarianceAccumulator acc(vectors.front().size());
  for (const auto& v : vectors) acc.add(v);
  return acc.covariance();
}

CovarianceAccumulator::CovarianceAccumulator(Eigen::Index dim)
    : sum_(ComplexMatrix::Zero(dim, dim)) {}

void CovarianceAccumulator::check_size(Eigen::Index n) const {
  if (n != sum_.rows()) throw DimensionError("CovarianceAccumulator: vector length mismatch");
}

void CovarianceAccumulator::add(const ComplexVector& v) {
  check_size(v.size());
  sum_.noalias() += v * v.adjoint();
  ++count_;
}

ComplexMatrix CovarianceAccumulator::covariance() const {
  if (count_ == 0) throw DimensionError("CovarianceAccumulator: no samples");
  ComplexMatrix c = sum_ / static_cast<double>(count_);
  // Exact Hermitian symmetry regardless of accumulation rounding.
  return (c + c.adjoint()) * 0.5;
}

double frobenius_norm2(const ComplexMatrix& a) { return a.squaredNorm(); }

}  // namespace ddst
