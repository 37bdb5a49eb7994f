#include "ndt/tensor.hpp"

#include <cmath>

#ifdef NDT_USE_CBLAS
#include <cblas.h>
#endif

namespace ndt {

template <typename T>
std::string TensorT<T>::shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
std::size_t TensorT<T>::checked_volume(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

template <typename T>
bool TensorT<T>::all_finite() const {
  for (T v : data_) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

namespace {

void check_inner(std::size_t ak, std::size_t bk, const std::string& a_shape, const std::string& b_shape) {
  if (ak != bk) {
    throw DimensionError("matmul inner dimensions differ: " + a_shape + " vs " + b_shape);
  }
}

template <typename T>
void require_matrix(const TensorT<T>& t, const char* name) {
  if (t.rank() != 2) {
    throw DimensionError(std::string("matmul operand ") + name + " must be rank-2, got shape " + t.shape_str());
  }
}

#ifdef NDT_USE_CBLAS
inline void gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int n, int m, int k, const double* a, int lda,
                 const double* b, int ldb, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, ta, tb, n, m, k, 1.0, a, lda, b, ldb, 0.0, c, ldc);
}
inline void gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, int n, int m, int k, const float* a, int lda,
                 const float* b, int ldb, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, ta, tb, n, m, k, 1.0f, a, lda, b, ldb, 0.0f, c, ldc);
}
#else
// Fallback kernels: i-k-j loop order keeps the inner loop contiguous. Each
// output element accumulates over k in a fixed order, so results are
// reproducible run to run.
template <typename T>
void gemm_nn(std::size_t n, std::size_t m, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < n; ++i) {
    T* ci = c + i * m;
    for (std::size_t j = 0; j < m; ++j) ci[j] = T(0);
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      const T* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}
template <typename T>
void gemm_tn(std::size_t n, std::size_t m, std::size_t k, const T* a, const T* b, T* c) {
  // a is stored [k x n]; result is a^T * b.
  for (std::size_t i = 0; i < n * m; ++i) c[i] = T(0);
  for (std::size_t p = 0; p < k; ++p) {
    const T* ap = a + p * n;
    const T* bp = b + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      T* ci = c + i * m;
      const T av = ap[i];
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}
template <typename T>
void gemm_nt(std::size_t n, std::size_t m, std::size_t k, const T* a, const T* b, T* c) {
  // b is stored [m x k]; result is a * b^T.
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const T* bj = b + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}
#endif

}  // namespace

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  require_matrix(a, "a");
  require_matrix(b, "b");
  check_inner(a.cols(), b.rows(), a.shape_str(), b.shape_str());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  TensorT<T> c({n, m});
  if (n == 0 || m == 0) return c;
#ifdef NDT_USE_CBLAS
  gemm(CblasNoTrans, CblasNoTrans, static_cast<int>(n), static_cast<int>(m), static_cast<int>(k), a.data(),
       static_cast<int>(k), b.data(), static_cast<int>(m), c.data(), static_cast<int>(m));
#else
  gemm_nn(n, m, k, a.data(), b.data(), c.data());
#endif
  return c;
}

template <typename T>
TensorT<T> matmul_tn(const TensorT<T>& a, const TensorT<T>& b) {
  require_matrix(a, "a");
  require_matrix(b, "b");
  check_inner(a.rows(), b.rows(), a.shape_str(), b.shape_str());
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  TensorT<T> c({n, m});
  if (n == 0 || m == 0) return c;
#ifdef NDT_USE_CBLAS
  gemm(CblasTrans, CblasNoTrans, static_cast<int>(n), static_cast<int>(m), static_cast<int>(k), a.data(),
       static_cast<int>(n), b.data(), static_cast<int>(m), c.data(), static_cast<int>(m));
#else
  gemm_tn(n, m, k, a.data(), b.data(), c.data());
#endif
  return c;
}

template <typename T>
TensorT<T> matmul_nt(const TensorT<T>& a, const TensorT<T>& b) {
  require_matrix(a, "a");
  require_matrix(b, "b");
  check_inner(a.cols(), b.cols(), a.shape_str(), b.shape_str());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  TensorT<T> c({n, m});
  if (n == 0 || m == 0) return c;
#ifdef NDT_USE_CBLAS
  gemm(CblasNoTrans, CblasTrans, static_cast<int>(n), static_cast<int>(m), static_cast<int>(k), a.data(),
       static_cast<int>(k), b.data(), static_cast<int>(k), c.data(), static_cast<int>(m));
#else
  gemm_nt(n, m, k, a.data(), b.data(), c.data());
#endif
  return c;
}

template class TensorT<float>;
template class TensorT<double>;
template TensorT<float> matmul(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> matmul(const TensorT<double>&, const TensorT<double>&);
template TensorT<float> matmul_tn(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> matmul_tn(const TensorT<double>&, const TensorT<double>&);
template TensorT<float> matmul_nt(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> matmul_nt(const TensorT<double>&, const TensorT<double>&);

}  // namespace ndt
