#include "probedet/symmetric_eigen.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "probedet/errors.h"

namespace probedet {
namespace {

class Tridiagonalizer {
 public:
  Tridiagonalizer(std::vector<double> a, size_t n)
      : n_(static_cast<int>(n)), v_(std::move(a)), d_(n), e_(n) {}

  double& V(int i, int j) { return v_[static_cast<size_t>(i) * n_ + j]; }

  // Householder reduction; leaves the diagonal in d_, the subdiagonal in e_
  // and the accumulated orthogonal transform in v_.
  void Reduce() {
    const int n = n_;
    for (int j = 0; j < n; ++j) d_[j] = V(n - 1, j);

    for (int i = n - 1; i > 0; --i) {
      double scale = 0.0;
      double h = 0.0;
      for (int k = 0; k < i; ++k) scale += std::abs(d_[k]);
      if (scale == 0.0) {
        e_[i] = d_[i - 1];
        for (int j = 0; j < i; ++j) {
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
          V(j, i) = 0.0;
        }
      } else {
        for (int k = 0; k < i; ++k) {
          d_[k] /= scale;
          h += d_[k] * d_[k];
        }
        double f = d_[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e_[i] = scale * g;
        h -= f * g;
        d_[i - 1] = f - g;
        for (int j = 0; j < i; ++j) e_[j] = 0.0;

        for (int j = 0; j < i; ++j) {
          f = d_[j];
          V(j, i) = f;
          g = e_[j] + V(j, j) * f;
          for (int k = j + 1; k <= i - 1; ++k) {
            g += V(k, j) * d_[k];
            e_[k] += V(k, j) * f;
          }
          e_[j] = g;
        }
        f = 0.0;
        for (int j = 0; j < i; ++j) {
          e_[j] /= h;
          f += e_[j] * d_[j];
        }
        const double hh = f / (h + h);
        for (int j = 0; j < i; ++j) e_[j] -= hh * d_[j];
        for (int j = 0; j < i; ++j) {
          f = d_[j];
          g = e_[j];
          for (int k = j; k <= i - 1; ++k) {
            V(k, j) -= (f * e_[k] + g * d_[k]);
          }
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
        }
      }
      d_[i] = h;
    }

    for (int i = 0; i < n - 1; ++i) {
      V(n - 1, i) = V(i, i);
      V(i, i) = 1.0;
      const double h = d_[i + 1];
      if (h != 0.0) {
        for (int k = 0; k <= i; ++k) d_[k] = V(k, i + 1) / h;
        for (int j = 0; j <= i; ++j) {
          double g = 0.0;
          for (int k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
          for (int k = 0; k <= i; ++k) V(k, j) -= g * d_[k];
        }
      }
      for (int k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
      d_[j] = V(n - 1, j);
      V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e_[0] = 0.0;
  }

  // Implicit QL iterations on the tridiagonal form.
  void Diagonalize() {
    const int n = n_;
    for (int i = 1; i < n; ++i) e_[i - 1] = e_[i];
    e_[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (int l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d_[l]) + std::abs(e_[l]));
      int m = l;
      while (m < n - 1 && std::abs(e_[m]) > eps * tst1) ++m;

      if (m > l) {
        int iterations = 0;
        do {
          if (++iterations > 200) {
            Fail(ErrorCode::kArgument, "symmetric eigensolver did not converge");
          }
          double g = d_[l];
          double p = (d_[l + 1] - g) / (2.0 * e_[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d_[l] = e_[l] / (p + r);
          d_[l + 1] = e_[l] * (p + r);
          const double dl1 = d_[l + 1];
          double h = g - d_[l];
          for (int i = l + 2; i < n; ++i) d_[i] -= h;
          f += h;

          p = d_[m];
          double c = 1.0;
          double c2 = c;
          double c3 = c;
          const double el1 = e_[l + 1];
          double s = 0.0;
          double s2 = 0.0;
          for (int i = m - 1; i >= l; --i) {
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e_[i];
            h = c * p;
            r = std::hypot(p, e_[i]);
            e_[i + 1] = s * r;
            s = e_[i] / r;
            c = p / r;
            p = c * d_[i] - s * g;
            d_[i + 1] = h + s * (c * g + s * d_[i]);
            for (int k = 0; k < n; ++k) {
              h = V(k, i + 1);
              V(k, i + 1) = s * V(k, i) + c * h;
              V(k, i) = c * V(k, i) - s * h;
            }
          }
          p = -s * s2 * c3 * el1 * e_[l] / dl1;
          e_[l] = s * p;
          d_[l] = c * p;
        } while (std::abs(e_[l]) > eps * tst1);
      }
      d_[l] += f;
      e_[l] = 0.0;
    }
  }

  SymmetricEigenResult Sorted() {
    const size_t n = static_cast<size_t>(n_);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return d_[a] < d_[b]; });
    SymmetricEigenResult out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (size_t j = 0; j < n; ++j) {
      out.values[j] = d_[order[j]];
      for (size_t i = 0; i < n; ++i) {
        out.vectors[i * n + j] = v_[i * n + order[j]];
      }
    }
    return out;
  }

 private:
  int n_;
  std::vector<double> v_;
  std::vector<double> d_;
  std::vector<double> e_;
};

}  // namespace

SymmetricEigenResult SolveSymmetric(std::vector<double> matrix, size_t n) {
  if (n == 0 || matrix.size() != n * n) {
    Fail(ErrorCode::kArgument, "SolveSymmetric: matrix must be n x n, n >= 1");
  }
  if (n == 1) {
    return {{matrix[0]}, {1.0}, 1};
  }
  Tridiagonalizer t(std::move(matrix), n);
  t.Reduce();
  t.Diagonalize();
  return t.Sorted();
}

}  // namespace probedet
