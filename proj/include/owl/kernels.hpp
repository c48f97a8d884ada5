#pragma once

#include <cmath>
#include <cstddef>

namespace owl::nn {

// Dense batch kernels used by the Q-networks. Every kernel comes in a
// serial reference version and an OpenMP version. Both variants call the
// same noinline per-row worker, so the compiler emits one code path and the
// results are bitwise equal for any thread count (the OpenMP loops are
// static over independent output rows). Tests assert exact agreement;
// tools/bench_kernels compares throughput.

enum class Backend { Serial, OpenMP };

Backend& kernel_backend();  // process-wide selector, defaults to OpenMP

#if defined(__GNUC__) && !defined(__clang__)
#define OWL_NOINLINE __attribute__((noinline, noclone))
#elif defined(__GNUC__)
#define OWL_NOINLINE __attribute__((noinline))
#else
#define OWL_NOINLINE
#endif

// ---- Y[M x N] = X[M x K] * W[N x K]^T (+ optional bias b[N]) ----

// The dot reduction is vectorized explicitly; the lane count is fixed at
// compile time, so results stay deterministic run to run.
template <class T>
OWL_NOINLINE void affine_fwd_row(const T* x, const T* W, const T* b, T* y, int K, int N) {
    for (int n = 0; n < N; ++n) {
        const T* w = W + static_cast<size_t>(n) * K;
        T acc = T(0);
#pragma omp simd reduction(+ : acc)
        for (int k = 0; k < K; ++k) acc += x[k] * w[k];
        y[n] = acc + (b ? b[n] : T(0));
    }
}

template <class T>
void affine_fwd_serial(const T* X, const T* W, const T* b, T* Y, int M, int K, int N) {
    for (int m = 0; m < M; ++m)
        affine_fwd_row(X + static_cast<size_t>(m) * K, W, b, Y + static_cast<size_t>(m) * N, K, N);
}

template <class T>
void affine_fwd_omp(const T* X, const T* W, const T* b, T* Y, int M, int K, int N) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m)
        affine_fwd_row(X + static_cast<size_t>(m) * K, W, b, Y + static_cast<size_t>(m) * N, K, N);
}

// ---- dX[M x K] = dY[M x N] * W[N x K] ----

template <class T>
OWL_NOINLINE void matmul_nn_row(const T* dy, const T* W, T* dx, int N, int K) {
    for (int k = 0; k < K; ++k) dx[k] = T(0);
    for (int n = 0; n < N; ++n) {
        const T g = dy[n];
        const T* w = W + static_cast<size_t>(n) * K;
        for (int k = 0; k < K; ++k) dx[k] += g * w[k];
    }
}

template <class T>
void matmul_nn_serial(const T* dY, const T* W, T* dX, int M, int N, int K) {
    for (int m = 0; m < M; ++m)
        matmul_nn_row(dY + static_cast<size_t>(m) * N, W, dX + static_cast<size_t>(m) * K, N, K);
}

template <class T>
void matmul_nn_omp(const T* dY, const T* W, T* dX, int M, int N, int K) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m)
        matmul_nn_row(dY + static_cast<size_t>(m) * N, W, dX + static_cast<size_t>(m) * K, N, K);
}

// ---- dW[N x K] += dY[M x N]^T * X[M x K]; db[N] += column sums of dY ----

template <class T>
OWL_NOINLINE void grad_weights_col(const T* dY, const T* X, T* dw, T* db_n, int n, int M, int N,
                                   int K) {
    T acc_b = T(0);
    for (int m = 0; m < M; ++m) {
        const T g = dY[static_cast<size_t>(m) * N + n];
        acc_b += g;
        const T* x = X + static_cast<size_t>(m) * K;
        for (int k = 0; k < K; ++k) dw[k] += g * x[k];
    }
    if (db_n) *db_n += acc_b;
}

template <class T>
void grad_weights_serial(const T* dY, const T* X, T* dW, T* db, int M, int N, int K) {
    for (int n = 0; n < N; ++n)
        grad_weights_col(dY, X, dW + static_cast<size_t>(n) * K, db ? db + n : nullptr, n, M, N, K);
}

template <class T>
void grad_weights_omp(const T* dY, const T* X, T* dW, T* db, int M, int N, int K) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n)
        grad_weights_col(dY, X, dW + static_cast<size_t>(n) * K, db ? db + n : nullptr, n, M, N, K);
}

// ---- row-wise layer normalization with learned gain/bias ----

template <class T>
OWL_NOINLINE void layernorm_row(const T* x, const T* gain, const T* bias, T* y, T* mean, T* rstd,
                                int D) {
    T mu = T(0);
    for (int d = 0; d < D; ++d) mu += x[d];
    mu /= T(D);
    T var = T(0);
    for (int d = 0; d < D; ++d) {
        T c = x[d] - mu;
        var += c * c;
    }
    var /= T(D);
    T rs = T(1) / std::sqrt(var + T(1e-5));
    for (int d = 0; d < D; ++d) y[d] = gain[d] * ((x[d] - mu) * rs) + bias[d];
    *mean = mu;
    *rstd = rs;
}

template <class T>
void layernorm_fwd_serial(const T* X, const T* gain, const T* bias, T* Y, T* mean, T* rstd,
                          int M, int D) {
    for (int m = 0; m < M; ++m)
        layernorm_row(X + static_cast<size_t>(m) * D, gain, bias, Y + static_cast<size_t>(m) * D,
                      mean + m, rstd + m, D);
}

template <class T>
void layernorm_fwd_omp(const T* X, const T* gain, const T* bias, T* Y, T* mean, T* rstd,
                       int M, int D) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m)
        layernorm_row(X + static_cast<size_t>(m) * D, gain, bias, Y + static_cast<size_t>(m) * D,
                      mean + m, rstd + m, D);
}

template <class T>
OWL_NOINLINE void layernorm_bwd_rowgrad(const T* x, const T* gain, const T* dY, T mean, T rstd,
                                        T* dx, int D) {
    // xhat = (x - mean) * rstd; dxhat = dY * gain
    T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
    for (int d = 0; d < D; ++d) {
        T xhat = (x[d] - mean) * rstd;
        T dxhat = dY[d] * gain[d];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
    }
    T inv_d = T(1) / T(D);
    for (int d = 0; d < D; ++d) {
        T xhat = (x[d] - mean) * rstd;
        T dxhat = dY[d] * gain[d];
        dx[d] = rstd * (dxhat - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
    }
}

template <class T>
OWL_NOINLINE void layernorm_bwd_colgrad(const T* X, const T* dY, const T* mean, const T* rstd,
                                        T* dgain_d, T* dbias_d, int d, int M, int D) {
    T acc_g = T(0), acc_b = T(0);
    for (int m = 0; m < M; ++m) {
        const T x = X[static_cast<size_t>(m) * D + d];
        const T dy = dY[static_cast<size_t>(m) * D + d];
        acc_g += dy * (x - mean[m]) * rstd[m];
        acc_b += dy;
    }
    *dgain_d += acc_g;
    *dbias_d += acc_b;
}

template <class T>
void layernorm_bwd_serial(const T* X, const T* gain, const T* dY, const T* mean, const T* rstd,
                          T* dX, T* dgain, T* dbias, int M, int D) {
    for (int d = 0; d < D; ++d)
        layernorm_bwd_colgrad(X, dY, mean, rstd, dgain + d, dbias + d, d, M, D);
    for (int m = 0; m < M; ++m)
        layernorm_bwd_rowgrad(X + static_cast<size_t>(m) * D, gain, dY + static_cast<size_t>(m) * D,
                              mean[m], rstd[m], dX + static_cast<size_t>(m) * D, D);
}

template <class T>
void layernorm_bwd_omp(const T* X, const T* gain, const T* dY, const T* mean, const T* rstd,
                       T* dX, T* dgain, T* dbias, int M, int D) {
#pragma omp parallel for schedule(static)
    for (int d = 0; d < D; ++d)
        layernorm_bwd_colgrad(X, dY, mean, rstd, dgain + d, dbias + d, d, M, D);
#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m)
        layernorm_bwd_rowgrad(X + static_cast<size_t>(m) * D, gain, dY + static_cast<size_t>(m) * D,
                              mean[m], rstd[m], dX + static_cast<size_t>(m) * D, D);
}

// ---- rectifier ----

template <class T>
void relu_fwd_serial(const T* X, T* Y, size_t n) {
    for (size_t i = 0; i < n; ++i) Y[i] = X[i] > T(0) ? X[i] : T(0);
}

template <class T>
void relu_fwd_omp(const T* X, T* Y, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) Y[i] = X[i] > T(0) ? X[i] : T(0);
}

template <class T>
void relu_bwd_serial(const T* X, const T* dY, T* dX, size_t n) {
    for (size_t i = 0; i < n; ++i) dX[i] = X[i] > T(0) ? dY[i] : T(0);
}

template <class T>
void relu_bwd_omp(const T* X, const T* dY, T* dX, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        dX[i] = X[i] > T(0) ? dY[i] : T(0);
}

// ---- dispatchers ----
// Threading only pays off for real batches; tiny inputs (acting-time
// forwards with M = 1) take the serial path. Both paths share the row
// workers, so the choice never changes results.

inline bool use_omp(int rows) { return kernel_backend() == Backend::OpenMP && rows >= 8; }

template <class T>
void affine_fwd(const T* X, const T* W, const T* b, T* Y, int M, int K, int N) {
    if (use_omp(M)) affine_fwd_omp(X, W, b, Y, M, K, N);
    else affine_fwd_serial(X, W, b, Y, M, K, N);
}

template <class T>
void matmul_nn(const T* dY, const T* W, T* dX, int M, int N, int K) {
    if (use_omp(M)) matmul_nn_omp(dY, W, dX, M, N, K);
    else matmul_nn_serial(dY, W, dX, M, N, K);
}

template <class T>
void grad_weights(const T* dY, const T* X, T* dW, T* db, int M, int N, int K) {
    if (use_omp(N)) grad_weights_omp(dY, X, dW, db, M, N, K);
    else grad_weights_serial(dY, X, dW, db, M, N, K);
}

template <class T>
void layernorm_fwd(const T* X, const T* gain, const T* bias, T* Y, T* mean, T* rstd, int M, int D) {
    if (use_omp(M)) layernorm_fwd_omp(X, gain, bias, Y, mean, rstd, M, D);
    else layernorm_fwd_serial(X, gain, bias, Y, mean, rstd, M, D);
}

template <class T>
void layernorm_bwd(const T* X, const T* gain, const T* dY, const T* mean, const T* rstd, T* dX,
                   T* dgain, T* dbias, int M, int D) {
    if (use_omp(M))
        layernorm_bwd_omp(X, gain, dY, mean, rstd, dX, dgain, dbias, M, D);
    else layernorm_bwd_serial(X, gain, dY, mean, rstd, dX, dgain, dbias, M, D);
}

template <class T>
void relu_fwd(const T* X, T* Y, size_t n) {
    if (use_omp(static_cast<int>(n > 4096 ? 4096 : n))) relu_fwd_omp(X, Y, n);
    else relu_fwd_serial(X, Y, n);
}

template <class T>
void relu_bwd(const T* X, const T* dY, T* dX, size_t n) {
    if (use_omp(static_cast<int>(n > 4096 ? 4096 : n))) relu_bwd_omp(X, dY, dX, n);
    else relu_bwd_serial(X, dY, dX, n);
}

}  // namespace owl::nn
