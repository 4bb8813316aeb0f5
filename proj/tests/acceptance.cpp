// Acceptance suite: one pass/fail line per criterion, each at its pinned
// tolerance. Exit code is the number of failed criteria.
// Usage: acceptance <path-to-dspt-binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "dspt/kernels.hpp"
#include "dspt/losses.hpp"
#include "dspt/noise.hpp"
#include "dspt/pinned.hpp"
#include "dspt/rng.hpp"
#include "dspt/trainer.hpp"
#include "dspt/verify.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int id, const std::string& text, bool ok) {
  std::printf("%s  criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

dspt::MetricsLog train_pinned(double eta, const dspt::LossKind& kind) {
  auto inst = dspt::pinned::make(eta);
  dspt::TrainConfig cfg;
  cfg.loss = kind;
  cfg.seed = dspt::pinned::kTrainSeed;
  cfg.model = {dspt::pinned::kMode, dspt::pinned::kScale};
  return dspt::train(cfg, inst.train, inst.test, inst.model);
}

int run_cmd(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), {});
}

}  // namespace

int main(int argc, char** argv) {
  ::unsetenv("DSPT_OUT_ROOT");
  const std::string cli = argc > 1 ? argv[1] : "";

  // 1. Gradient formula: analytic vs independent closed form (1e-10 abs) and
  //    central differences (1e-4), 1e4 random (z, y), C in 2..50, under 10 s.
  {
    const auto t0 = Clock::now();
    const auto report = dspt::check_prop31(10000, 2, 50, 7);
    const double elapsed = seconds_since(t0);
    criterion(1,
              "gradient formula matches independent form and differences "
              "(worst ratio " + std::to_string(report.worst_violation) +
                  ", " + std::to_string(elapsed) + " s)",
              report.passed() && elapsed < 10.0);
  }

  // 2. Gradient vanishing: |grad|_1 <= 5*delta on every constructed
  //    confident-wrong trial, deltas 1e-1..1e-8, 1e3 trials each; the
  //    per-trial envelope at delta=1e-8 enforces the 5e-8 cap.
  {
    const double deltas[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    bool ok = true;
    for (int classes : {2, 5, 20}) {
      const auto report = dspt::check_thm32(deltas, classes, 1000, 11);
      ok = ok && report.passed();
    }
    criterion(2, "saturation envelope 5*delta holds on all 24000 trials", ok);
  }

  // 3. Loss bounds: 1e5 random plus adversarial inputs per class count,
  //    bounds with 1e-9 slack, width 1 nat to 1e-12, endpoints within 1e-6.
  {
    const int counts[] = {2, 3, 10, 101, 1000};
    const auto report = dspt::check_prop33(counts, 100000, 13);
    criterion(3, "loss bounds, 1-nat width and endpoint attainment", report.passed());
  }

  // 4. Risk bounds by exhaustive simplex-grid oracle, 20 randomized
  //    instances per setting, under 2 minutes.
  {
    const auto t0 = Clock::now();
    bool ok = dspt::check_thm34(3, 0.4, 4, 40, 20, 17).passed();
    ok = ok && dspt::check_thm34(2, 0.49, 4, 50, 20, 19).passed();
    ok = ok && dspt::check_thm35(dspt::TransitionMatrix::pair_flip(3, 0.3), 4,
                                 40, 20, 23).passed();
    for (std::uint64_t seed : {29ull, 31ull}) {
      const auto t = dspt::random_admissible_matrix(3, seed);
      ok = ok && dspt::check_thm35(t, 4, 40, 10, seed).passed();
    }
    const double elapsed = seconds_since(t0);
    criterion(4,
              "risk bounds certified on grid oracle (" +
                  std::to_string(elapsed) + " s)",
              ok && elapsed < 120.0);
  }

  // 5. Epoch-0 gradient audit on the pinned benchmark: mislabeled mean under
  //    double softmax <= 0.1x CE, and CE's mislabeled mean exceeds 1.5.
  {
    auto inst = dspt::pinned::make();
    const auto ce = dspt::summarize_audit(
        dspt::grad_audit(inst.model, inst.train, dspt::LossKind::ce()));
    const auto ds = dspt::summarize_audit(
        dspt::grad_audit(inst.model, inst.train, dspt::LossKind::dspt()));
    const bool ok =
        ds.noisy_mean <= 0.1 * ce.noisy_mean && ce.noisy_mean > 1.5;
    criterion(5,
              "epoch-0 audit: noisy means dspt " +
                  std::to_string(ds.noisy_mean) + " vs ce " +
                  std::to_string(ce.noisy_mean),
              ok);
  }

  // 6. Loss curves over 50 epochs: double-softmax clean/noisy gap within the
  //    1-nat interval width at every epoch, CE's gap exceeds it by epoch 20.
  {
    const auto ce_log = train_pinned(dspt::pinned::kEta, dspt::LossKind::ce());
    const auto ds_log = train_pinned(dspt::pinned::kEta, dspt::LossKind::dspt());
    bool ds_ok = true;
    for (const auto& row : ds_log.rows)
      ds_ok = ds_ok &&
              std::abs(row.clean_loss_mean - row.noisy_loss_mean) <= 1.0;
    bool ce_exceeds_by_20 = false;
    for (const auto& row : ce_log.rows)
      if (row.epoch <= 20 &&
          std::abs(row.clean_loss_mean - row.noisy_loss_mean) > 1.0)
        ce_exceeds_by_20 = true;
    criterion(6, "loss-curve gap: dspt within 1 nat everywhere, ce past it",
              ds_ok && ce_exceeds_by_20);
  }

  // 7. Accuracy vs noise rate: dspt >= ce at every rate, margin >= 5 points
  //    at 0.8, dspt at or above zero-shot through 0.6, ce below it at 0.8.
  {
    const double zero_shot = dspt::pinned::make(0.0).zero_shot_test_acc;
    bool ok = true;
    std::string detail;
    for (double eta : {0.2, 0.4, 0.6, 0.8}) {
      const double ce = train_pinned(eta, dspt::LossKind::ce()).final_acc;
      const double ds = train_pinned(eta, dspt::LossKind::dspt()).final_acc;
      ok = ok && ds >= ce;
      if (eta < 0.7)
        ok = ok && ds >= zero_shot;
      else
        ok = ok && (ds - ce >= 0.05) && (ce < zero_shot);
      detail += " " + std::to_string(eta).substr(0, 3) + ":ce=" +
                std::to_string(ce).substr(0, 6) + ",dspt=" +
                std::to_string(ds).substr(0, 6);
    }
    criterion(7, "noise-rate sweep (zs=" + std::to_string(zero_shot).substr(0, 6) +
                     detail + ")",
              ok);
  }

  // 8. Threshold sensitivity: logitclip accuracy varies by >= 5 points over
  //    tau in {0.05,0.1,0.5,1,2} while hyperparameter-free dspt lands within
  //    2 points of the best tau.
  {
    double best = 0.0, worst = 1.0;
    for (double tau : {0.05, 0.1, 0.5, 1.0, 2.0}) {
      const double acc =
          train_pinned(dspt::pinned::kEta, dspt::LossKind::logit_clip(tau))
              .final_acc;
      best = std::max(best, acc);
      worst = std::min(worst, acc);
    }
    const double ds =
        train_pinned(dspt::pinned::kEta, dspt::LossKind::dspt()).final_acc;
    const bool ok = (best - worst >= 0.05) && (ds >= best - 0.02);
    criterion(8,
              "logitclip tau sensitivity " + std::to_string(best - worst) +
                  " vs dspt at " + std::to_string(ds),
              ok);
  }

  // 9. Determinism: rerunning every command with identical flags and seed
  //    produces byte-identical CSV/JSON/binary outputs.
  {
    bool ok = !cli.empty();
    if (ok) {
      const fs::path base = fs::temp_directory_path() / "dspt_acceptance";
      fs::remove_all(base);
      fs::create_directories(base);
      const std::string data1 = (base / "d1").string();
      const std::string data2 = (base / "d2").string();
      const std::string gen =
          " gen-data --classes 8 --dim 32 --n-train 600 --n-test 200"
          " --kappa 40 --anchor-perturb 0.9 --seed 21 --out ";
      ok = ok && run_cmd(cli + gen + data1) == 0 && run_cmd(cli + gen + data2) == 0;
      for (const char* f : {"train.dsptemb", "test.dsptemb", "anchors.dsptemb",
                            "manifest.json"})
        ok = ok && read_bytes(fs::path(data1) / f) == read_bytes(fs::path(data2) / f);

      const std::string tr = " train --data " + data1 +
                             " --loss dspt --noise sym:0.6 --epochs 5"
                             " --seed 3 --out ";
      ok = ok && run_cmd(cli + tr + (base / "r1").string()) == 0 &&
           run_cmd(cli + tr + (base / "r2").string()) == 0;
      for (const char* f : {"metrics.csv", "metrics.json", "checkpoint.bin",
                            "manifest.json"})
        ok = ok && read_bytes(base / "r1" / f) == read_bytes(base / "r2" / f);

      const std::string au = " audit --data " + data1 +
                             " --losses ce,dspt --noise sym:0.6 --seed 3 --out ";
      ok = ok && run_cmd(cli + au + (base / "a1").string()) == 0 &&
           run_cmd(cli + au + (base / "a2").string()) == 0;
      for (const char* f : {"audit_ce.csv", "audit_dspt.csv", "summary.json"})
        ok = ok && read_bytes(base / "a1" / f) == read_bytes(base / "a2" / f);

      const std::string ve =
          " verify --check prop33 --classes 11 --trials 3000 --seed 5 --out ";
      ok = ok && run_cmd(cli + ve + (base / "v1").string()) == 0 &&
           run_cmd(cli + ve + (base / "v2").string()) == 0;
      ok = ok && read_bytes(base / "v1" / "reports.json") ==
                     read_bytes(base / "v2" / "reports.json");

      const std::string sw = " sweep --data " + data1 +
                             " --losses ce,dspt --rates 0.4 --epochs 2"
                             " --seed 8 --out ";
      ok = ok && run_cmd(cli + sw + (base / "s1").string()) == 0 &&
           run_cmd(cli + sw + (base / "s2").string()) == 0;
      ok = ok && read_bytes(base / "s1" / "sweep.csv") ==
                     read_bytes(base / "s2" / "sweep.csv");
      fs::remove_all(base);
    }
    criterion(9, "command reruns are byte-identical", ok);
  }

  // 10. Noise model calibration: empirical rates within three binomial
  //     standard errors at n = 1e5 for both kinds at every tested rate.
  {
    const long n = 100000;
    std::vector<int> labels(static_cast<size_t>(n));
    dspt::rng::Xoshiro256ss gen(41);
    for (auto& y : labels) y = static_cast<int>(gen.below(5));
    bool ok = true;
    for (double eta : {0.2, 0.4, 0.6, 0.8}) {
      const double sigma3 = 3.0 * std::sqrt(eta * (1.0 - eta) / n);
      const auto sym =
          dspt::corrupt(labels, dspt::TransitionMatrix::symmetric(5, eta), 7);
      const auto pair =
          dspt::corrupt(labels, dspt::TransitionMatrix::pair_flip(5, eta), 7);
      ok = ok && std::abs(sym.report.empirical_rate - eta) <= sigma3;
      ok = ok && std::abs(pair.report.empirical_rate - eta) <= sigma3;
    }
    criterion(10, "empirical corruption rates within 3 sigma at n=1e5", ok);
  }

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
