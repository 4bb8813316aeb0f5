// Benchmark comparing the OpenMP kernels against the serial reference on the
// three hot paths: per-sample gradient audits, batched sample evaluation and
// loss-bound sweeps. Verifies bit-identical outputs before timing.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dspt/data.hpp"
#include "dspt/kernels.hpp"
#include "dspt/losses.hpp"
#include "dspt/model.hpp"
#include "dspt/noise.hpp"
#include "dspt/rng.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

bool bit_identical(const dspt::Vec& a, const dspt::Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  long n = 20000;
  long trials = 200000;
  int reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--n") n = std::atol(argv[i + 1]);
    if (std::string(argv[i]) == "--trials") trials = std::atol(argv[i + 1]);
    if (std::string(argv[i]) == "--reps") reps = std::atoi(argv[i + 1]);
  }

#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled at build time\n");
#endif

  auto bundle = dspt::gen_synthetic(20, 64, n, 100, 50.0, 0.35, 99);
  dspt::apply_noise(bundle.train,
                    dspt::TransitionMatrix::symmetric(20, 0.6), 7);
  dspt::PrototypeModel model(bundle.anchors, dspt::ShiftMode::SharedShift, 30.0);
  const auto dspt_loss = dspt::LossKind::dspt();

  // --- audit kernel ---------------------------------------------------------
  dspt::Vec omp_out(static_cast<size_t>(n)), ser_out(static_cast<size_t>(n));
  dspt::kernels::audit_grad_l1(model, bundle.train, dspt_loss, omp_out);
  dspt::kernels::serial::audit_grad_l1(model, bundle.train, dspt_loss, ser_out);
  if (!bit_identical(omp_out, ser_out)) {
    std::printf("FATAL: audit kernels disagree\n");
    return 1;
  }
  const double audit_ser = time_best_of(reps, [&] {
    dspt::kernels::serial::audit_grad_l1(model, bundle.train, dspt_loss, ser_out);
  });
  const double audit_omp = time_best_of(reps, [&] {
    dspt::kernels::audit_grad_l1(model, bundle.train, dspt_loss, omp_out);
  });
  std::printf("audit_grad_l1     n=%-8ld serial %8.4fs  omp %8.4fs  speedup %.2fx\n",
              n, audit_ser, audit_omp, audit_ser / audit_omp);

  // --- batched sample evaluation -------------------------------------------
  std::vector<long> idx(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  std::vector<dspt::kernels::SampleEval> evals(static_cast<size_t>(n));
  dspt::Vec grads_omp(static_cast<size_t>(n) * model.param_size());
  dspt::Vec grads_ser(static_cast<size_t>(n) * model.param_size());
  dspt::kernels::sample_evals(model, bundle.train, idx, dspt_loss, false, evals,
                              grads_omp);
  dspt::kernels::serial::sample_evals(model, bundle.train, idx, dspt_loss, false,
                                      evals, grads_ser);
  if (!bit_identical(grads_omp, grads_ser)) {
    std::printf("FATAL: sample_evals kernels disagree\n");
    return 1;
  }
  const double eval_ser = time_best_of(reps, [&] {
    dspt::kernels::serial::sample_evals(model, bundle.train, idx, dspt_loss,
                                        false, evals, grads_ser);
  });
  const double eval_omp = time_best_of(reps, [&] {
    dspt::kernels::sample_evals(model, bundle.train, idx, dspt_loss, false,
                                evals, grads_omp);
  });
  std::printf("sample_evals      n=%-8ld serial %8.4fs  omp %8.4fs  speedup %.2fx\n",
              n, eval_ser, eval_omp, eval_ser / eval_omp);

  // --- loss-bound sweep (value kernel over random logits) ------------------
  const int classes = 101;
  auto sweep = [&](dspt::Vec& out, bool parallel) {
    const long m = trials;
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (long t = 0; t < m; ++t) {
        dspt::rng::Xoshiro256ss gen(dspt::rng::substream(31, static_cast<std::uint64_t>(t)));
        dspt::Vec z(static_cast<size_t>(classes));
        for (auto& v : z) v = 30.0 * (2.0 * gen.uniform() - 1.0);
        out[static_cast<size_t>(t)] = dspt::losses::value(
            dspt_loss, z, static_cast<int>(gen.below(classes)));
      }
    } else {
      for (long t = 0; t < m; ++t) {
        dspt::rng::Xoshiro256ss gen(dspt::rng::substream(31, static_cast<std::uint64_t>(t)));
        dspt::Vec z(static_cast<size_t>(classes));
        for (auto& v : z) v = 30.0 * (2.0 * gen.uniform() - 1.0);
        out[static_cast<size_t>(t)] = dspt::losses::value(
            dspt_loss, z, static_cast<int>(gen.below(classes)));
      }
    }
  };
  dspt::Vec sweep_omp(static_cast<size_t>(trials)), sweep_ser(static_cast<size_t>(trials));
  sweep(sweep_omp, true);
  sweep(sweep_ser, false);
  if (!bit_identical(sweep_omp, sweep_ser)) {
    std::printf("FATAL: sweep kernels disagree\n");
    return 1;
  }
  const double sweep_ser_t = time_best_of(reps, [&] { sweep(sweep_ser, false); });
  const double sweep_omp_t = time_best_of(reps, [&] { sweep(sweep_omp, true); });
  std::printf("loss value sweep  t=%-8ld serial %8.4fs  omp %8.4fs  speedup %.2fx\n",
              trials, sweep_ser_t, sweep_omp_t, sweep_ser_t / sweep_omp_t);

  std::printf("all kernel outputs bit-identical across schedules\n");
  return 0;
}
