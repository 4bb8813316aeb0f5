#pragma once

#include <span>

#include "dspt/data.hpp"
#include "dspt/losses.hpp"
#include "dspt/model.hpp"

// Data-parallel per-sample kernels. Every kernel writes to disjoint
// preassigned slots, so the OpenMP path and the serial reference produce
// bit-identical output for any thread count. Reductions that need a fixed
// order (batch means) are done by the caller over the filled slots.
namespace dspt::kernels {

struct SampleEval {
  double loss = 0.0;
  double grad_l1 = 0.0;
  bool selected = true;  // false when selection drops a mismatched sample
};

// Evaluates loss, logit-gradient L1 and the per-sample parameter gradient for
// every index in `idx` against its noisy label. param_grads has
// idx.size() * model.param_size() slots; rows of unselected samples are
// zeroed. Does not mutate the model. Non-finite results are recorded as-is;
// callers scan for them (kernels never throw from parallel regions).
void sample_evals(const PrototypeModel& model, const Dataset& ds,
                  std::span<const long> idx, const LossKind& kind,
                  bool selection, std::span<SampleEval> evals,
                  std::span<double> param_grads);

// Per-sample L1 norm of dloss/dz at the current model state, noisy labels.
void audit_grad_l1(const PrototypeModel& model, const Dataset& ds,
                   const LossKind& kind, std::span<double> out);

// Number of samples whose prediction matches the clean label.
long correct_count(const PrototypeModel& model, const Dataset& ds);

// Serial reference implementations, kept for testing and benchmarking.
namespace serial {
void sample_evals(const PrototypeModel& model, const Dataset& ds,
                  std::span<const long> idx, const LossKind& kind,
                  bool selection, std::span<SampleEval> evals,
                  std::span<double> param_grads);
void audit_grad_l1(const PrototypeModel& model, const Dataset& ds,
                   const LossKind& kind, std::span<double> out);
long correct_count(const PrototypeModel& model, const Dataset& ds);
}  // namespace serial

}  // namespace dspt::kernels
