// SPDX-License-Identifier: Apache-2.0
//
// Dense frequency-domain tensors. Both are row-major with the antenna axes
// innermost, so the N_r x N_t channel matrix of one RE is a contiguous
// row-major block that can be mapped as an Eigen matrix without copying.
#pragma once

#include <cstddef>
#include <vector>

#include "ddst/numerics.hpp"

namespace ddst {

/// K x T x antennas grid of complex symbols (transmit or receive).
class ResourceGrid {
public:
  ResourceGrid() = default;
  ResourceGrid(int subcarriers, int symbols, int antennas)
      : k_(subcarriers), t_(symbols), a_(antennas),
        data_(static_cast<std::size_t>(subcarriers) * symbols * antennas) {}

  int subcarriers() const { return k_; }
  int symbols() const { return t_; }
  int antennas() const { return a_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int k, int t, int a) const {
    return (static_cast<std::size_t>(k) * t_ + t) * a_ + a;
  }
  cplx& operator()(int k, int t, int a) { return data_[index(k, t, a)]; }
  const cplx& operator()(int k, int t, int a) const { return data_[index(k, t, a)]; }

  /// Antenna vector of RE (k, t).
  Eigen::Map<ComplexVector> re(int k, int t) {
    return Eigen::Map<ComplexVector>(&data_[index(k, t, 0)], a_);
  }
  Eigen::Map<const ComplexVector> re(int k, int t) const {
    return Eigen::Map<const ComplexVector>(&data_[index(k, t, 0)], a_);
  }

  /// antennas x T matrix of subcarrier k (the per-subcarrier Y^k / S^k).
  ComplexMatrix subcarrier_matrix(int k) const;
  void set_subcarrier_matrix(int k, const ComplexMatrix& m);

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  bool same_shape(const ResourceGrid& o) const {
    return k_ == o.k_ && t_ == o.t_ && a_ == o.a_;
  }

private:
  int k_ = 0, t_ = 0, a_ = 0;
  std::vector<cplx> data_;
};

/// K x T x N_r x N_t per-RE MIMO coefficients h_{m,n}^k(t).
class ChannelTensor {
public:
  using MatrixMap = Eigen::Map<ComplexMatrix>;
  using ConstMatrixMap = Eigen::Map<const ComplexMatrix>;

  ChannelTensor() = default;
  ChannelTensor(int subcarriers, int symbols, int n_r, int n_t)
      : k_(subcarriers), t_(symbols), nr_(n_r), nt_(n_t),
        data_(static_cast<std::size_t>(subcarriers) * symbols * n_r * n_t) {}

  int subcarriers() const { return k_; }
  int symbols() const { return t_; }
  int n_r() const { return nr_; }
  int n_t() const { return nt_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int k, int t, int m, int n) const {
    return ((static_cast<std::size_t>(k) * t_ + t) * nr_ + m) * nt_ + n;
  }
  cplx& operator()(int k, int t, int m, int n) { return data_[index(k, t, m, n)]; }
  const cplx& operator()(int k, int t, int m, int n) const {
    return data_[index(k, t, m, n)];
  }

  MatrixMap matrix(int k, int t) { return MatrixMap(&data_[index(k, t, 0, 0)], nr_, nt_); }
  ConstMatrixMap matrix(int k, int t) const {
    return ConstMatrixMap(&data_[index(k, t, 0, 0)], nr_, nt_);
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  bool same_shape(const ChannelTensor& o) const {
    return k_ == o.k_ && t_ == o.t_ && nr_ == o.nr_ && nt_ == o.nt_;
  }

private:
  int k_ = 0, t_ = 0, nr_ = 0, nt_ = 0;
  std::vector<cplx> data_;
};

}  // namespace ddst
