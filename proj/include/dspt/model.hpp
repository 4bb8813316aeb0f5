#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dspt/numerics.hpp"

namespace dspt {

enum class ShiftMode { SharedShift, PerClass };

// Frozen unit-norm class anchors plus a learnable shift, producing
// temperature-scaled cosine logits: z_c = scale * <x, normalize(anchor_c + shift_c)>.
// The anchors are never touched by training; the shift starts at zero so the
// initial model reproduces zero-shot predictions exactly.
class PrototypeModel {
public:
  // anchor_rows: C rows of dimension d, each within 1e-3 of unit norm
  // (renormalized exactly on construction). scale > 0.
  PrototypeModel(std::vector<Vec> anchor_rows, ShiftMode mode, double scale);

  int classes() const noexcept { return classes_; }
  int dim() const noexcept { return dim_; }
  double scale() const noexcept { return scale_; }
  ShiftMode mode() const noexcept { return mode_; }

  std::span<const double> anchor(int c) const;
  std::span<const double> shift() const noexcept { return shift_; }

  // Number of learnable scalars: d for SharedShift, C*d for PerClass.
  size_t param_size() const noexcept { return shift_.size(); }

  // z_c = scale * <x, direction_c>. Validates that x is unit norm (1e-6).
  LogitVector forward(std::span<const double> x) const;
  void forward_into(std::span<const double> x, std::span<double> z) const;

  // Same, without the unit-norm check; for kernels over validated datasets.
  void forward_unchecked(std::span<const double> x,
                         std::span<double> z) const noexcept;

  // Accumulates d(upstream . z)/d(shift) into grad (size param_size()).
  // Read-only on the model; safe to call concurrently across samples.
  void backward_accumulate(std::span<const double> x,
                           std::span<const double> upstream,
                           std::span<double> grad) const noexcept;

  // argmax_c <x, anchor_c> with ties broken toward the lowest index.
  int zero_shot_predict(std::span<const double> x) const;

  // Prediction with the current shift; lowest-index ties.
  int predict(std::span<const double> x) const;

  // shift -= lr * grad, then refreshes the cached directions. Single-writer:
  // the trainer owns parameter application.
  void apply_step(std::span<const double> grad, double lr);

  void save_checkpoint(const std::string& path) const;
  static PrototypeModel load_checkpoint(const std::string& path);

private:
  void refresh_directions();
  std::span<const double> direction(int c) const noexcept {
    return {directions_.data() + static_cast<size_t>(c) * dim_,
            static_cast<size_t>(dim_)};
  }
  std::span<const double> shift_row(int c) const noexcept;

  int classes_;
  int dim_;
  ShiftMode mode_;
  double scale_;
  Vec anchors_;      // C x d, unit rows, frozen
  Vec shift_;        // d (shared) or C x d (per-class)
  Vec directions_;   // C x d, normalize(anchor_c + shift_c), kept in sync
  Vec w_norms_;      // C, |anchor_c + shift_c|
};

}  // namespace dspt
