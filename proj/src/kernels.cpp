#include "dspt/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dspt::kernels {

namespace {

thread_local Vec z_buf;
thread_local Vec dz_buf;

// Shared per-sample worker; both schedules call exactly this, so the OpenMP
// and serial paths are bit-identical for any thread count.
inline void eval_one(const PrototypeModel& model, const Dataset& ds, long sample,
                     const LossKind& kind, bool selection, SampleEval& eval,
                     double* param_grad_row, size_t param_size) {
  const int classes = model.classes();
  z_buf.resize(static_cast<size_t>(classes));
  dz_buf.resize(static_cast<size_t>(classes));
  const auto x = ds.feature(sample);
  model.forward_unchecked(x, z_buf);

  const int label = ds.noisy[static_cast<size_t>(sample)];
  eval.loss = losses::value_grad(kind, z_buf, label, dz_buf);
  eval.grad_l1 = numerics::l1_norm(dz_buf);

  bool selected = true;
  if (selection) {
    const double top = *std::max_element(z_buf.begin(), z_buf.end());
    selected = z_buf[static_cast<size_t>(label)] == top;  // inclusive ties
  }
  eval.selected = selected;

  if (param_grad_row != nullptr) {
    std::fill(param_grad_row, param_grad_row + param_size, 0.0);
    if (selected)
      model.backward_accumulate(x, dz_buf, {param_grad_row, param_size});
  }
}

inline double audit_one(const PrototypeModel& model, const Dataset& ds,
                        long sample, const LossKind& kind) {
  const int classes = model.classes();
  z_buf.resize(static_cast<size_t>(classes));
  dz_buf.resize(static_cast<size_t>(classes));
  model.forward_unchecked(ds.feature(sample), z_buf);
  losses::value_grad(kind, z_buf, ds.noisy[static_cast<size_t>(sample)], dz_buf);
  return numerics::l1_norm(dz_buf);
}

inline long correct_one(const PrototypeModel& model, const Dataset& ds,
                        long sample) {
  return model.predict(ds.feature(sample)) ==
                 ds.clean[static_cast<size_t>(sample)]
             ? 1
             : 0;
}

}  // namespace

void sample_evals(const PrototypeModel& model, const Dataset& ds,
                  std::span<const long> idx, const LossKind& kind,
                  bool selection, std::span<SampleEval> evals,
                  std::span<double> param_grads) {
  const long m = static_cast<long>(idx.size());
  const size_t p = model.param_size();
#pragma omp parallel for schedule(static)
  for (long k = 0; k < m; ++k) {
    eval_one(model, ds, idx[static_cast<size_t>(k)], kind, selection,
             evals[static_cast<size_t>(k)],
             param_grads.data() + static_cast<size_t>(k) * p, p);
  }
}

void audit_grad_l1(const PrototypeModel& model, const Dataset& ds,
                   const LossKind& kind, std::span<double> out) {
  const long n = ds.n;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = audit_one(model, ds, i, kind);
}

long correct_count(const PrototypeModel& model, const Dataset& ds) {
  const long n = ds.n;
  long total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (long i = 0; i < n; ++i) total += correct_one(model, ds, i);
  return total;
}

namespace serial {

void sample_evals(const PrototypeModel& model, const Dataset& ds,
                  std::span<const long> idx, const LossKind& kind,
                  bool selection, std::span<SampleEval> evals,
                  std::span<double> param_grads) {
  const long m = static_cast<long>(idx.size());
  const size_t p = model.param_size();
  for (long k = 0; k < m; ++k) {
    eval_one(model, ds, idx[static_cast<size_t>(k)], kind, selection,
             evals[static_cast<size_t>(k)],
             param_grads.data() + static_cast<size_t>(k) * p, p);
  }
}

void audit_grad_l1(const PrototypeModel& model, const Dataset& ds,
                   const LossKind& kind, std::span<double> out) {
  for (long i = 0; i < ds.n; ++i)
    out[static_cast<size_t>(i)] = audit_one(model, ds, i, kind);
}

long correct_count(const PrototypeModel& model, const Dataset& ds) {
  long total = 0;
  for (long i = 0; i < ds.n; ++i) total += correct_one(model, ds, i);
  return total;
}

}  // namespace serial

}  // namespace dspt::kernels
