// Kernel benchmark: OpenMP matmul against the serial reference, plus
// end-to-end encoder forward throughput. Build with -DCMAKE_BUILD_TYPE=Release
// and run: ./bench/emobench-bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <omp.h>

#include "emobench/encoder.hpp"
#include "emobench/tensor.hpp"

using namespace emobench;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(int repeats, const std::function<void()>& fn) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int r = 0; r < repeats; ++r) {
    fn();
  }
  return std::chrono::duration<double>(Clock::now() - start).count() /
         static_cast<double>(repeats);
}

void bench_matmul(int repeats) {
  std::printf("%-28s %10s %12s %12s %9s\n", "kernel", "size", "serial(ms)", "openmp(ms)",
              "speedup");
  Rng rng(1);
  for (std::size_t n : {64, 128, 256, 512}) {
    const Tensor a = Tensor::randn({n, n}, rng, 0.0, 1.0);
    const Tensor b = Tensor::randn({n, n}, rng, 0.0, 1.0);
    NoGradGuard no_grad;
    const double serial = time_of(repeats, [&] { (void)matmul_reference(a, b); });
    const double parallel = time_of(repeats, [&] { (void)matmul(a, b); });
    // kernels must agree bit for bit at every size
    const Tensor x = matmul_reference(a, b);
    const Tensor y = matmul(a, b);
    const bool identical =
        std::memcmp(x.values().data(), y.values().data(), x.numel() * sizeof(double)) == 0;
    std::printf("%-28s %7zux%-3zu %12.3f %12.3f %8.2fx %s\n", "matmul", n, n, serial * 1e3,
                parallel * 1e3, serial / parallel, identical ? "" : "MISMATCH");
  }
}

void bench_encoder(int repeats) {
  EncoderConfig config;
  config.d_model = 64;
  config.n_layers = 2;
  config.n_heads = 4;
  config.d_ff = 128;
  config.max_len = 64;
  config.vocab_size = 2000;
  config.dropout_rate = 0.0;
  const EncoderParams params = init_params(config, 7);
  TokenizedPair pair;
  pair.primary_ids.assign(config.max_len, 3);
  pair.primary_ids[0] = 2;
  pair.primary_len = config.max_len;
  pair.polarity_ids = {4, 5, 6};
  pair.polarity_len = 3;

  for (BlendMode mode : {BlendMode::None, BlendMode::PooledConcat, BlendMode::AttentionKeys}) {
    BlendConfig blend;
    blend.mode = mode;
    const double forward = time_of(
        repeats, [&] { (void)predict_logit(pair, params, config, blend); });
    std::printf("%-33s %7s %12.3f ms/utterance (%0.0f/s)\n",
                ("encoder forward [" + blend_mode_to_string(mode) + "]").c_str(), "64x64",
                forward * 1e3, 1.0 / forward);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads: %d (OMP_NUM_THREADS to change)\n\n", omp_get_max_threads());
  bench_matmul(repeats);
  std::printf("\n");
  bench_encoder(repeats * 10);
  return 0;
}
