// Compares the serial reference kernels against the OpenMP kernels at the
// batch shapes the Q-networks actually use.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "owl/kernels.hpp"

using namespace owl::nn;
using clock_type = std::chrono::steady_clock;

namespace {

std::vector<float> random_vec(size_t n, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

template <class F>
double time_ms(F&& fn, int reps) {
    fn();  // warm up
    auto t0 = clock_type::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_affine(int M, int K, int N, int reps) {
    auto X = random_vec(static_cast<size_t>(M) * K, 1);
    auto W = random_vec(static_cast<size_t>(N) * K, 2);
    auto b = random_vec(static_cast<size_t>(N), 3);
    std::vector<float> Y(static_cast<size_t>(M) * N);
    double serial =
        time_ms([&] { affine_fwd_serial(X.data(), W.data(), b.data(), Y.data(), M, K, N); }, reps);
    double omp =
        time_ms([&] { affine_fwd_omp(X.data(), W.data(), b.data(), Y.data(), M, K, N); }, reps);
    double gflop = 2.0 * M * K * N * 1e-9;
    std::printf("affine_fwd   M=%-4d K=%-4d N=%-4d  serial %7.3f ms (%5.2f GF/s)  omp %7.3f ms "
                "(%5.2f GF/s)  speedup %.2fx\n",
                M, K, N, serial, gflop / (serial * 1e-3), omp, gflop / (omp * 1e-3),
                serial / omp);
}

void bench_grad_weights(int M, int N, int K, int reps) {
    auto dY = random_vec(static_cast<size_t>(M) * N, 4);
    auto X = random_vec(static_cast<size_t>(M) * K, 5);
    std::vector<float> dW(static_cast<size_t>(N) * K), db(static_cast<size_t>(N));
    double serial = time_ms(
        [&] { grad_weights_serial(dY.data(), X.data(), dW.data(), db.data(), M, N, K); }, reps);
    double omp = time_ms(
        [&] { grad_weights_omp(dY.data(), X.data(), dW.data(), db.data(), M, N, K); }, reps);
    double gflop = 2.0 * M * K * N * 1e-9;
    std::printf("grad_weights M=%-4d N=%-4d K=%-4d  serial %7.3f ms (%5.2f GF/s)  omp %7.3f ms "
                "(%5.2f GF/s)  speedup %.2fx\n",
                M, N, K, serial, gflop / (serial * 1e-3), omp, gflop / (omp * 1e-3),
                serial / omp);
}

void bench_layernorm(int M, int D, int reps) {
    auto X = random_vec(static_cast<size_t>(M) * D, 6);
    auto g = random_vec(static_cast<size_t>(D), 7);
    auto b = random_vec(static_cast<size_t>(D), 8);
    std::vector<float> Y(static_cast<size_t>(M) * D), mean(M), rstd(M);
    double serial = time_ms(
        [&] { layernorm_fwd_serial(X.data(), g.data(), b.data(), Y.data(), mean.data(),
                                   rstd.data(), M, D); },
        reps);
    double omp = time_ms(
        [&] { layernorm_fwd_omp(X.data(), g.data(), b.data(), Y.data(), mean.data(), rstd.data(),
                                M, D); },
        reps);
    std::printf("layernorm    M=%-4d D=%-4d          serial %7.3f ms             omp %7.3f ms  "
                "           speedup %.2fx\n",
                M, D, serial, omp, serial / omp);
}

}  // namespace

int main() {
    std::printf("batch kernels, serial reference vs OpenMP\n");
    bench_affine(256, 192, 256, 50);
    bench_affine(256, 256, 256, 50);
    bench_affine(256, 256, 128, 50);
    bench_affine(1, 192, 256, 200);
    bench_grad_weights(256, 256, 192, 50);
    bench_grad_weights(256, 256, 256, 50);
    bench_layernorm(256, 256, 200);
    return 0;
}
