// SPDX-License-Identifier: Apache-2.0
#include "ddst/grid.hpp"

#include "ddst/error.hpp"

namespace ddst {

ComplexMatrix ResourceGrid::subcarrier_matrix(int k) const {
  ComplexMatrix m(a_, t_);
  for (int t = 0; t < t_; ++t)
    for (int a = 0; a < a_; ++a) m(a, t) = (*this)(k, t, a);
  return m;
}

void ResourceGrid::set_subcarrier_matrix(int k, const ComplexMatrix& m) {
  if (m.rows() != a_ || m.cols() != t_) {
    throw DimensionError("ResourceGrid::set_subcarrier_matrix: shape mismatch");
  }
  for (int t = 0; t < t_; ++t)
    for (int a = 0; a < a_; ++a) (*this)(k, t, a) = m(a, t);
}

}  // namespace ddst
