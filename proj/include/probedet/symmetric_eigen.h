#pragma once

#include <cstddef>
#include <vector>

namespace probedet {

// Full eigendecomposition of a dense real symmetric matrix.
struct SymmetricEigenResult {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // n x n row-major; column j pairs values[j]
  size_t n = 0;
};

// `matrix` is n x n row-major and must be exactly symmetric. Householder reduction to tridiagonal form followed by the
// implicit QL algorithm. Deterministic.
SymmetricEigenResult SolveSymmetric(std::vector<double> matrix, size_t n);

}  // namespace probedet
