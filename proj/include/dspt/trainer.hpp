#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dspt/data.hpp"
#include "dspt/losses.hpp"
#include "dspt/model.hpp"
#include "dspt/noise.hpp"

namespace dspt {

struct ModelSpec {
  ShiftMode mode = ShiftMode::SharedShift;
  double scale = 30.0;
};

struct TrainConfig {
  LossKind loss = LossKind::ce();
  int epochs = 50;
  long batch = 32;
  double lr0 = 0.002;  // cosine-annealed to zero per epoch
  std::uint64_t seed = 0;
  NoiseSpec noise;     // applied by the caller; recorded for manifests
  ModelSpec model;
  bool selection = false;

  void validate() const;
};

struct EpochRow {
  int epoch = 0;
  double test_acc = 0.0;
  double clean_loss_mean = 0.0;
  double noisy_loss_mean = 0.0;   // NaN when the epoch saw no noisy samples
  double clean_grad_l1_mean = 0.0;
  double noisy_grad_l1_mean = 0.0;
  double lr = 0.0;
};

struct MetricsLog {
  std::vector<EpochRow> rows;
  double final_acc = 0.0;  // mean test accuracy of the last five epochs

  // Columns exactly: epoch,test_acc,clean_loss_mean,noisy_loss_mean,
  // clean_grad_l1_mean,noisy_grad_l1_mean,lr
  std::string to_csv() const;
  std::string to_json_string(int indent = -1) const;
};

// Mini-batch SGD with per-epoch cosine annealing, lr_t = lr0*(1+cos(pi t/E))/2.
// Batch gradient is the arithmetic mean over the batch's selected samples,
// reduced in ascending dataset-index order. Deterministic per seed.
// Throws NumericAbortError with a diagnostic on non-finite loss.
MetricsLog train(const TrainConfig& config, const Dataset& train_set,
                 const Dataset& test_set, PrototypeModel& model);

struct AuditRecord {
  long index = 0;
  bool is_noisy = false;
  double grad_l1 = 0.0;
};

// Per-sample L1 gradient audit at the current model state (no updates).
std::vector<AuditRecord> grad_audit(const PrototypeModel& model,
                                    const Dataset& train_set,
                                    const LossKind& kind);

std::string audit_to_csv(const std::vector<AuditRecord>& records);

struct AuditSummary {
  long clean_count = 0;
  long noisy_count = 0;
  double clean_mean = 0.0;
  double noisy_mean = 0.0;  // NaN when no noisy samples
};
AuditSummary summarize_audit(const std::vector<AuditRecord>& records);

// Fraction of argmax-correct predictions on clean test labels.
// Throws InvalidInputError on an empty test set.
double evaluate(const PrototypeModel& model, const Dataset& test_set);

}  // namespace dspt
