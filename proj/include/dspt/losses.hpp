#pragma once

#include <optional>
#include <span>
#include <string>

#include "dspt/numerics.hpp"

namespace dspt {

enum class LossTag {
  CE,
  DSPT,
  Smoothing,
  LogitNorm,
  LogitClip,
  Bootstrap,
  NCE,
  GCE,
  SquareNorm,
  SelectCE,
};

// A loss family plus its scalar parameter. Parameter ranges are checked once
// here; evaluation code trusts them. Immutable, shareable across threads.
class LossKind {
public:
  static LossKind ce();
  static LossKind dspt();
  static LossKind smoothing(double alpha = 0.2);
  static LossKind logit_norm(double tau = 1.0);
  static LossKind logit_clip(double tau);
  static LossKind bootstrap(double beta = 0.8);
  static LossKind nce();
  static LossKind gce(double q = 0.7);
  static LossKind square_norm();
  static LossKind select_ce();

  // CLI grammar: "ce", "dspt", "smoothing[:alpha]", "logitnorm[:tau]",
  // "logitclip:tau", "bootstrap[:beta]", "nce", "gce[:q]", "squarenorm",
  // "selectce". tau_flag supplies logitclip's threshold when the text omits
  // it; logitclip without either is an error.
  static LossKind parse(const std::string& spec,
                        std::optional<double> tau_flag = std::nullopt);

  LossTag tag() const noexcept { return tag_; }
  double param() const noexcept { return param_; }
  std::string name() const;

  // SelectCE evaluates as CE; the trainer drops mismatched samples.
  bool drops_mismatched() const noexcept { return tag_ == LossTag::SelectCE; }

private:
  LossKind(LossTag tag, double param) : tag_(tag), param_(param) {}

  LossTag tag_;
  double param_;
};

// Scalar loss value (nats) and its gradient with respect to the logits.
struct LossEval {
  double value;
  Vec grad;
};

namespace losses {

// Span kernels used by the hot paths; `grad` has z.size() slots.
double ce_value_grad(std::span<const double> z, int y, std::span<double> grad);
double dspt_value_grad(std::span<const double> z, int y, std::span<double> grad);
double value_grad(const LossKind& kind, std::span<const double> z, int y,
                  std::span<double> grad);
double value(const LossKind& kind, std::span<const double> z, int y);

// DSPT loss as a function of the inner probability vector p (the state after
// the first softmax): log sum_j exp(p_j) - p_y. Valid on the closed simplex
// including one-hot vertices; shared by the risk-bound grid oracle.
double dspt_outer_loss(std::span<const double> p, int y) noexcept;

}  // namespace losses

// Typed entry points; validate y and dispatch to the kernels above.
LossEval ce_eval(const LogitVector& z, int y);
LossEval dspt_eval(const LogitVector& z, int y);
LossEval baseline_eval(const LossKind& kind, const LogitVector& z, int y);
LossEval eval_loss(const LossKind& kind, const LogitVector& z, int y);

// Central-difference gradient oracle, (L(z+h e_i) - L(z-h e_i)) / (2h).
// For Bootstrap the soft target is frozen at the center point, matching the
// detached-target gradient it checks. h must lie in [1e-7, 1e-3].
Vec fd_gradient(const LossKind& kind, const LogitVector& z, int y, double h);

// Gradient-check metric: max_i |a_i - b_i| / max(1, |a_i|, |b_i|). Relative
// for large components, absolute below 1; keeps saturated near-zero
// gradients comparable against finite-difference roundoff.
double gradient_mismatch(std::span<const double> a, std::span<const double> b);

}  // namespace dspt
