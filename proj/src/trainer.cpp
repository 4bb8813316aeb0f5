#include "dspt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dspt/io.hpp"
#include "dspt/kernels.hpp"

namespace dspt {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInputError("epochs must be >= 1");
  if (batch < 1) throw InvalidInputError("batch size must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0))
    throw InvalidInputError("lr0 must be positive");
  if (!(model.scale > 0.0)) throw InvalidInputError("model scale must be positive");
}

namespace {

struct GroupStats {
  double clean_loss = 0.0, noisy_loss = 0.0;
  double clean_l1 = 0.0, noisy_l1 = 0.0;
  long clean_n = 0, noisy_n = 0;

  void add(bool is_noisy, double loss, double l1) {
    if (is_noisy) {
      noisy_loss += loss;
      noisy_l1 += l1;
      ++noisy_n;
    } else {
      clean_loss += loss;
      clean_l1 += l1;
      ++clean_n;
    }
  }
};

double mean_or_nan(double sum, long n) {
  return n > 0 ? sum / static_cast<double>(n)
               : std::numeric_limits<double>::quiet_NaN();
}

// NaN means "group was empty"; JSON spells that null.
std::string json_number(double v) {
  return std::isfinite(v) ? io::format_double(v) : "null";
}

}  // namespace

MetricsLog train(const TrainConfig& config, const Dataset& train_set,
                 const Dataset& test_set, PrototypeModel& model) {
  config.validate();
  if (train_set.dim != model.dim() || train_set.classes != model.classes())
    throw InvalidInputError("train set does not match model dimensions");
  if (test_set.dim != model.dim() || test_set.classes != model.classes())
    throw InvalidInputError("test set does not match model dimensions");
  if (train_set.n < 1) throw InvalidInputError("train set is empty");
  if (test_set.n < 1) throw InvalidInputError("test set is empty");

  const size_t p = model.param_size();
  const bool is_dspt = config.loss.tag() == LossTag::DSPT;
  const double bound_lo =
      std::log(1.0 + (train_set.classes - 1) / std::numbers::e);
  const double bound_hi = std::log(std::numbers::e + train_set.classes - 1);

  std::vector<kernels::SampleEval> evals(static_cast<size_t>(config.batch));
  Vec param_grads(static_cast<size_t>(config.batch) * p);
  Vec mean_grad(p);
  std::vector<std::pair<long, long>> order;  // (dataset index, slot)
  order.reserve(static_cast<size_t>(config.batch));

  MetricsLog log;
  log.rows.reserve(static_cast<size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr0 *
                      (1.0 + std::cos(std::numbers::pi * epoch / config.epochs)) /
                      2.0;
    const auto perm = epoch_permutation(train_set.n, config.seed, epoch);
    GroupStats stats;

    for (const auto batch : batch_slices(perm, config.batch)) {
      const long m = static_cast<long>(batch.size());
      kernels::sample_evals(model, train_set, batch, config.loss,
                            config.selection, {evals.data(), static_cast<size_t>(m)},
                            {param_grads.data(), static_cast<size_t>(m) * p});

      order.clear();
      for (long k = 0; k < m; ++k) {
        const long i = batch[static_cast<size_t>(k)];
        const auto& e = evals[static_cast<size_t>(k)];
        if (!std::isfinite(e.loss) || !std::isfinite(e.grad_l1)) {
          std::ostringstream os;
          os << "non-finite " << config.loss.name() << " loss at epoch "
             << epoch << ", sample " << i << " (value "
             << io::format_double(e.loss) << ")";
          throw NumericAbortError(os.str());
        }
        if (is_dspt &&
            (e.loss < bound_lo - 1e-9 || e.loss > bound_hi + 1e-9)) {
          std::ostringstream os;
          os << "loss bound breach at epoch " << epoch << ", sample " << i
             << ": " << io::format_double(e.loss) << " outside ["
             << io::format_double(bound_lo) << ", "
             << io::format_double(bound_hi) << "]";
          throw NumericAbortError(os.str());
        }
        stats.add(train_set.mask[static_cast<size_t>(i)] != 0, e.loss,
                  e.grad_l1);
        if (e.selected) order.emplace_back(i, k);
      }
      if (order.empty()) continue;  // selection dropped the whole batch

      // Mean over selected samples, reduced in ascending dataset-index order.
      std::sort(order.begin(), order.end());
      std::fill(mean_grad.begin(), mean_grad.end(), 0.0);
      for (const auto& [i, k] : order) {
        const double* row = param_grads.data() + static_cast<size_t>(k) * p;
        for (size_t j = 0; j < p; ++j) mean_grad[j] += row[j];
      }
      const double inv = 1.0 / static_cast<double>(order.size());
      for (size_t j = 0; j < p; ++j) mean_grad[j] *= inv;
      model.apply_step(mean_grad, lr);
    }

    EpochRow row;
    row.epoch = epoch;
    row.test_acc = evaluate(model, test_set);
    row.clean_loss_mean = mean_or_nan(stats.clean_loss, stats.clean_n);
    row.noisy_loss_mean = mean_or_nan(stats.noisy_loss, stats.noisy_n);
    row.clean_grad_l1_mean = mean_or_nan(stats.clean_l1, stats.clean_n);
    row.noisy_grad_l1_mean = mean_or_nan(stats.noisy_l1, stats.noisy_n);
    row.lr = lr;
    log.rows.push_back(row);
  }

  const int tail = std::min<int>(5, config.epochs);
  double sum = 0.0;
  for (int i = 0; i < tail; ++i)
    sum += log.rows[log.rows.size() - 1 - static_cast<size_t>(i)].test_acc;
  log.final_acc = sum / tail;
  return log;
}

std::vector<AuditRecord> grad_audit(const PrototypeModel& model,
                                    const Dataset& train_set,
                                    const LossKind& kind) {
  Vec l1(static_cast<size_t>(train_set.n));
  kernels::audit_grad_l1(model, train_set, kind, l1);
  std::vector<AuditRecord> records(static_cast<size_t>(train_set.n));
  for (long i = 0; i < train_set.n; ++i) {
    records[static_cast<size_t>(i)] = {
        i, train_set.mask[static_cast<size_t>(i)] != 0,
        l1[static_cast<size_t>(i)]};
  }
  return records;
}

std::string audit_to_csv(const std::vector<AuditRecord>& records) {
  std::string out = "index,is_noisy,grad_l1\n";
  for (const auto& r : records) {
    out += std::to_string(r.index);
    out += r.is_noisy ? ",1," : ",0,";
    out += io::format_double(r.grad_l1);
    out += '\n';
  }
  return out;
}

AuditSummary summarize_audit(const std::vector<AuditRecord>& records) {
  AuditSummary s;
  double clean_sum = 0.0, noisy_sum = 0.0;
  for (const auto& r : records) {
    if (r.is_noisy) {
      noisy_sum += r.grad_l1;
      ++s.noisy_count;
    } else {
      clean_sum += r.grad_l1;
      ++s.clean_count;
    }
  }
  s.clean_mean = mean_or_nan(clean_sum, s.clean_count);
  s.noisy_mean = mean_or_nan(noisy_sum, s.noisy_count);
  return s;
}

double evaluate(const PrototypeModel& model, const Dataset& test_set) {
  if (test_set.n < 1)
    throw InvalidInputError("cannot evaluate on an empty test set");
  return static_cast<double>(kernels::correct_count(model, test_set)) /
         static_cast<double>(test_set.n);
}

std::string MetricsLog::to_csv() const {
  std::string out =
      "epoch,test_acc,clean_loss_mean,noisy_loss_mean,clean_grad_l1_mean,"
      "noisy_grad_l1_mean,lr\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += io::format_double(r.test_acc);
    out += ',';
    out += io::format_double(r.clean_loss_mean);
    out += ',';
    out += io::format_double(r.noisy_loss_mean);
    out += ',';
    out += io::format_double(r.clean_grad_l1_mean);
    out += ',';
    out += io::format_double(r.noisy_grad_l1_mean);
    out += ',';
    out += io::format_double(r.lr);
    out += '\n';
  }
  return out;
}

std::string MetricsLog::to_json_string(int indent) const {
  (void)indent;
  std::string out = "{\"rows\":[";
  bool first = true;
  for (const auto& r : rows) {
    if (!first) out += ',';
    first = false;
    out += "{\"epoch\":" + std::to_string(r.epoch);
    out += ",\"test_acc\":" + io::format_double(r.test_acc);
    out += ",\"clean_loss_mean\":" + json_number(r.clean_loss_mean);
    out += ",\"noisy_loss_mean\":" + json_number(r.noisy_loss_mean);
    out += ",\"clean_grad_l1_mean\":" + json_number(r.clean_grad_l1_mean);
    out += ",\"noisy_grad_l1_mean\":" + json_number(r.noisy_grad_l1_mean);
    out += ",\"lr\":" + io::format_double(r.lr);
    out += '}';
  }
  out += "],\"final_acc\":" + io::format_double(final_acc) + "}";
  return out;
}

}  // namespace dspt
