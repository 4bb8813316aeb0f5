#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dspt/data.hpp"
#include "dspt/model.hpp"
#include "dspt/noise.hpp"

namespace dspt {

enum class CheckStatus { Pass, Fail, NotApplicable };

// One certified numerical check. worst_violation is a dimensionless ratio,
// observed quantity divided by its allowance, folded over every sub-assertion
// the check makes; pass iff worst_violation <= tolerance (tolerance is 1).
struct VerificationReport {
  std::string name;
  long trials = 0;
  double worst_violation = 0.0;
  double tolerance = 1.0;
  CheckStatus status = CheckStatus::Pass;
  std::string witness;  // serialized worst input, empty if none recorded
  std::string note;

  bool passed() const noexcept { return status == CheckStatus::Pass; }
  bool applicable() const noexcept { return status != CheckStatus::NotApplicable; }
  std::string to_json_string(int indent = -1) const;
};

// Analytic DSPT gradient vs an independent re-evaluation of the closed-form
// expression (1e-10 absolute) and central finite differences (1e-4, mismatch
// metric of gradient_mismatch). Random (z, y) with class counts drawn from
// [c_lo, c_hi], including near-saturated spreads.
VerificationReport check_prop31(long trials, int c_lo, int c_hi,
                                std::uint64_t seed);

// Confident-wrong construction p_hat = 1-delta: total L1 gradient <= 5*delta
// for every trial of every delta, and the per-delta mean vanishes
// monotonically (<= 5e-8 at delta = 1e-8).
VerificationReport check_thm32(std::span<const double> deltas, int classes,
                               long trials_per_delta, std::uint64_t seed);

// Loss bounds: every value within [log(1+(C-1)/e), log(e+C-1)] with 1e-9
// slack, interval width exactly 1 nat (1e-12), both endpoints approached
// within 1e-6 under spreads >= 40.
VerificationReport check_prop33(std::span<const int> class_counts,
                                long trials_per_class, std::uint64_t seed);

// Exhaustive simplex-grid risk oracle under symmetric noise:
// 0 <= R(noisy minimizer) - R(clean minimizer) <= eta/(1-eta) + 2/grid,
// over `instances` randomized label assignments. NotApplicable when
// eta >= 1 - 1/C.
VerificationReport check_thm34(int classes, double eta, int inputs, int grid,
                               int instances, std::uint64_t seed);

// Same oracle under a diagonally dominant transition matrix:
// 0 <= R^T(clean minimizer) - R^T(noisy minimizer) <= C*P_T + 2/grid,
// with P_T the instance mean of T_kk. NotApplicable when T is not
// column-wise diagonally dominant.
VerificationReport check_thm35(const TransitionMatrix& t, int inputs, int grid,
                               int instances, std::uint64_t seed);

// Random column-stochastic matrix with the dominant entry moved onto the
// diagonal; always satisfies the check_thm35 precondition.
TransitionMatrix random_admissible_matrix(int classes, std::uint64_t seed);

// Epoch-0 audit on a dataset with known mask: mean noisy-sample grad L1 under
// DSPT <= 0.1x CE's, and clean mean under DSPT <= CE's. NotApplicable when the
// zero-shot prior is below 80% or vacuous-pass when no sample is noisy.
VerificationReport check_grad_suppression(const Dataset& train_set,
                                          const PrototypeModel& model,
                                          std::uint64_t seed);

// The default bundle behind `verify --all`: prop31, thm32, prop33, thm34,
// thm35, gradsep, in that order.
std::vector<VerificationReport> run_all_checks(std::uint64_t seed);

std::string reports_to_json_string(const std::vector<VerificationReport>& reports,
                                   int indent = 2);

}  // namespace dspt
