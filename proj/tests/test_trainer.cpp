#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <limits>
#include <numbers>

#include "dspt/noise.hpp"
#include "dspt/pinned.hpp"
#include "dspt/trainer.hpp"

using namespace dspt;

namespace {

struct Easy {
  SyntheticBundle bundle;
  Easy() : bundle(gen_synthetic(5, 16, 300, 120, 60.0, 0.3, 33)) {}

  PrototypeModel model(ShiftMode mode = ShiftMode::SharedShift) const {
    return PrototypeModel(bundle.anchors, mode, 30.0);
  }
};

TrainConfig quick_config(const LossKind& kind, int epochs = 8,
                         std::uint64_t seed = 5) {
  TrainConfig cfg;
  cfg.loss = kind;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("cosine schedule endpoints") {
  Easy e;
  auto model = e.model();
  const auto log = train(quick_config(LossKind::ce(), 50), e.bundle.train,
                         e.bundle.test, model);
  REQUIRE(log.rows.size() == 50);
  CHECK(log.rows.front().lr == doctest::Approx(0.002).epsilon(1e-12));
  // final lr = lr0 * (1 + cos(pi * 49/50))/2, on its way to zero
  const double expected_last =
      0.002 * (1.0 + std::cos(std::numbers::pi * 49.0 / 50.0)) / 2.0;
  CHECK(log.rows.back().lr == doctest::Approx(expected_last).epsilon(1e-12));
  CHECK(log.rows.back().lr < 1e-5);
  for (size_t i = 1; i < log.rows.size(); ++i)
    CHECK(log.rows[i].lr < log.rows[i - 1].lr);
}

TEST_CASE("epoch zero test accuracy starts from the zero-shot prior") {
  Easy e;
  auto model = e.model();
  CHECK(evaluate(model, e.bundle.test) ==
        doctest::Approx(e.bundle.zero_shot_test_acc).epsilon(1e-12));
}

TEST_CASE("training without noise keeps both losses at or above zero-shot") {
  Easy e;
  for (const auto& kind : {LossKind::ce(), LossKind::dspt()}) {
    auto model = e.model();
    const auto log =
        train(quick_config(kind, 15), e.bundle.train, e.bundle.test, model);
    CHECK(log.final_acc >= e.bundle.zero_shot_test_acc - 1e-12);
  }
}

TEST_CASE("training is deterministic: identical config gives identical logs") {
  Easy e;
  auto noisy_train = e.bundle.train;
  apply_noise(noisy_train, TransitionMatrix::symmetric(5, 0.4), 11);

  auto m1 = e.model();
  auto m2 = e.model();
  const auto cfg = quick_config(LossKind::dspt(), 6, 17);
  const auto a = train(cfg, noisy_train, e.bundle.test, m1);
  const auto b = train(cfg, noisy_train, e.bundle.test, m2);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json_string() == b.to_json_string());
  CHECK(a.final_acc == b.final_acc);

  auto m3 = e.model();
  const auto c = train(quick_config(LossKind::dspt(), 6, 18), noisy_train,
                       e.bundle.test, m3);
  CHECK(a.to_csv() != c.to_csv());
}

#ifdef _OPENMP
TEST_CASE("training is bit-identical across thread counts") {
  Easy e;
  auto noisy_train = e.bundle.train;
  apply_noise(noisy_train, TransitionMatrix::symmetric(5, 0.4), 11);
  const auto cfg = quick_config(LossKind::dspt(), 5, 21);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto m1 = e.model();
  const auto single = train(cfg, noisy_train, e.bundle.test, m1);
  omp_set_num_threads(saved > 1 ? saved : 2);
  auto m2 = e.model();
  const auto multi = train(cfg, noisy_train, e.bundle.test, m2);
  omp_set_num_threads(saved);

  CHECK(single.to_csv() == multi.to_csv());
  CHECK(single.final_acc == multi.final_acc);
}
#endif

TEST_CASE("metrics csv has the exact column header and one row per epoch") {
  Easy e;
  auto model = e.model();
  const auto log =
      train(quick_config(LossKind::ce(), 4), e.bundle.train, e.bundle.test, model);
  const std::string csv = log.to_csv();
  CHECK(csv.rfind("epoch,test_acc,clean_loss_mean,noisy_loss_mean,"
                  "clean_grad_l1_mean,noisy_grad_l1_mean,lr\n", 0) == 0);
  long lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 5);  // header + 4 epochs
}

TEST_CASE("noisy metrics are nan sentinels when the noise rate is zero") {
  Easy e;
  auto model = e.model();
  const auto log =
      train(quick_config(LossKind::ce(), 3), e.bundle.train, e.bundle.test, model);
  for (const auto& row : log.rows) {
    CHECK(std::isnan(row.noisy_loss_mean));
    CHECK(std::isnan(row.noisy_grad_l1_mean));
    CHECK(std::isfinite(row.clean_loss_mean));
  }
  CHECK(log.to_csv().find("nan") != std::string::npos);
  CHECK(log.to_json_string().find("null") != std::string::npos);
}

TEST_CASE("selection trains on agreeing samples only") {
  Easy e;
  auto noisy_train = e.bundle.train;
  apply_noise(noisy_train, TransitionMatrix::symmetric(5, 0.5), 23);

  auto cfg = quick_config(LossKind::ce(), 6);
  cfg.selection = true;
  auto m1 = e.model();
  const auto with_selection = train(cfg, noisy_train, e.bundle.test, m1);

  cfg.selection = false;
  auto m2 = e.model();
  const auto without = train(cfg, noisy_train, e.bundle.test, m2);

  // dropping the disagreeing samples changes the trajectory and, on this
  // instance, prevents most of the noise fitting
  CHECK(with_selection.to_csv() != without.to_csv());
  CHECK(with_selection.final_acc >= without.final_acc);
}

TEST_CASE("dspt per-sample losses stay inside the bound interval while training") {
  // the trainer enforces this online and aborts on a breach, so a full run
  // doubles as the bound check
  auto inst = pinned::make(0.6);
  TrainConfig cfg;
  cfg.loss = LossKind::dspt();
  cfg.epochs = 3;
  cfg.seed = pinned::kTrainSeed;
  cfg.model = {pinned::kMode, pinned::kScale};
  CHECK_NOTHROW(train(cfg, inst.train, inst.test, inst.model));
}

TEST_CASE("grad audit leaves the model untouched and orders records by index") {
  Easy e;
  auto noisy_train = e.bundle.train;
  apply_noise(noisy_train, TransitionMatrix::pair_flip(5, 0.3), 29);
  auto model = e.model();
  const auto before = evaluate(model, e.bundle.test);
  const auto records = grad_audit(model, noisy_train, LossKind::dspt());
  CHECK(evaluate(model, e.bundle.test) == before);
  REQUIRE(records.size() == static_cast<size_t>(noisy_train.n));
  for (long i = 0; i < noisy_train.n; ++i) {
    CHECK(records[static_cast<size_t>(i)].index == i);
    CHECK(records[static_cast<size_t>(i)].is_noisy ==
          (noisy_train.mask[static_cast<size_t>(i)] != 0));
  }
  const auto summary = summarize_audit(records);
  CHECK(summary.clean_count + summary.noisy_count == noisy_train.n);
  CHECK(summary.noisy_count > 0);
  const std::string csv = audit_to_csv(records);
  CHECK(csv.rfind("index,is_noisy,grad_l1\n", 0) == 0);
}

TEST_CASE("evaluate rejects an empty test set") {
  Easy e;
  auto model = e.model();
  Dataset empty;
  empty.classes = 5;
  empty.dim = 16;
  empty.n = 0;
  empty.split = Split::Test;
  CHECK_THROWS_AS(evaluate(model, empty), InvalidInputError);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg.epochs = 1;
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg.batch = 32;
  cfg.lr0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  Easy e;
  Dataset poisoned = e.bundle.train;
  poisoned.features[3] = std::numeric_limits<double>::quiet_NaN();
  auto model = e.model();
  try {
    train(quick_config(LossKind::ce(), 2), poisoned, e.bundle.test, model);
    FAIL("expected NumericAbortError");
  } catch (const NumericAbortError& err) {
    CHECK(std::string(err.what()).find("non-finite") != std::string::npos);
    CHECK(std::string(err.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("final accuracy averages the last five epochs") {
  Easy e;
  auto model = e.model();
  const auto log =
      train(quick_config(LossKind::ce(), 7), e.bundle.train, e.bundle.test, model);
  double want = 0.0;
  for (size_t i = log.rows.size() - 5; i < log.rows.size(); ++i)
    want += log.rows[i].test_acc;
  CHECK(log.final_acc == doctest::Approx(want / 5.0).epsilon(1e-15));
}
