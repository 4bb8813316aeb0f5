#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "dspt/kernels.hpp"
#include "dspt/noise.hpp"
#include "dspt/pinned.hpp"

using namespace dspt;

namespace {

struct Fixture {
  SyntheticBundle bundle;
  PrototypeModel model;

  Fixture()
      : bundle(gen_synthetic(8, 24, 500, 100, 40.0, 0.6, 21)),
        model(bundle.anchors, ShiftMode::SharedShift, 30.0) {
    apply_noise(bundle.train, TransitionMatrix::symmetric(8, 0.4), 77);
  }
};

bool bits_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("openmp and serial audit kernels are bit identical") {
  Fixture f;
  for (const auto& kind : {LossKind::ce(), LossKind::dspt(), LossKind::gce(0.7)}) {
    Vec omp_out(static_cast<size_t>(f.bundle.train.n));
    Vec ser_out(static_cast<size_t>(f.bundle.train.n));
    kernels::audit_grad_l1(f.model, f.bundle.train, kind, omp_out);
    kernels::serial::audit_grad_l1(f.model, f.bundle.train, kind, ser_out);
    CHECK(bits_equal(omp_out, ser_out));
  }
}

TEST_CASE("openmp and serial sample evals are bit identical") {
  Fixture f;
  std::vector<long> idx;
  for (long i = 0; i < f.bundle.train.n; i += 3) idx.push_back(i);
  const size_t p = f.model.param_size();

  for (bool selection : {false, true}) {
    std::vector<kernels::SampleEval> ev_omp(idx.size()), ev_ser(idx.size());
    Vec g_omp(idx.size() * p), g_ser(idx.size() * p);
    kernels::sample_evals(f.model, f.bundle.train, idx, LossKind::dspt(),
                          selection, ev_omp, g_omp);
    kernels::serial::sample_evals(f.model, f.bundle.train, idx, LossKind::dspt(),
                                  selection, ev_ser, g_ser);
    CHECK(bits_equal(g_omp, g_ser));
    for (size_t k = 0; k < idx.size(); ++k) {
      CHECK(ev_omp[k].loss == ev_ser[k].loss);
      CHECK(ev_omp[k].grad_l1 == ev_ser[k].grad_l1);
      CHECK(ev_omp[k].selected == ev_ser[k].selected);
    }
  }
}

TEST_CASE("openmp and serial correct counts agree") {
  Fixture f;
  CHECK(kernels::correct_count(f.model, f.bundle.test) ==
        kernels::serial::correct_count(f.model, f.bundle.test));
}

TEST_CASE("selection keeps exactly the samples predicted as their noisy label") {
  Fixture f;
  std::vector<long> idx(static_cast<size_t>(f.bundle.train.n));
  for (long i = 0; i < f.bundle.train.n; ++i) idx[static_cast<size_t>(i)] = i;
  std::vector<kernels::SampleEval> evals(idx.size());
  Vec grads(idx.size() * f.model.param_size());
  kernels::sample_evals(f.model, f.bundle.train, idx, LossKind::select_ce(),
                        true, evals, grads);

  long kept = 0;
  for (long i = 0; i < f.bundle.train.n; ++i) {
    const bool agree = f.model.predict(f.bundle.train.feature(i)) ==
                       f.bundle.train.noisy[static_cast<size_t>(i)];
    CHECK(evals[static_cast<size_t>(i)].selected == agree);
    kept += agree ? 1 : 0;
    if (!agree) {
      // dropped rows carry a zero parameter gradient
      const double* row = grads.data() + static_cast<size_t>(i) * f.model.param_size();
      double norm = 0.0;
      for (size_t j = 0; j < f.model.param_size(); ++j) norm += std::abs(row[j]);
      CHECK(norm == 0.0);
    }
  }
  CHECK(kept > 0);
  CHECK(kept < f.bundle.train.n);
}

TEST_CASE("selection tie-break is inclusive: a tied noisy label is kept") {
  // x equidistant from both anchors gives bit-identical logits; the sample
  // is kept even though plain argmax would pick class 0
  const std::vector<Vec> anchors = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  PrototypeModel model(anchors, ShiftMode::SharedShift, 10.0);
  const double inv = 1.0 / std::sqrt(2.0);
  Dataset ds;
  ds.classes = 2;
  ds.dim = 3;
  ds.n = 1;
  ds.features = {inv, inv, 0.0};
  ds.clean = {0};
  ds.noisy = {1};
  ds.mask = {1};

  const std::vector<long> idx = {0};
  std::vector<kernels::SampleEval> evals(1);
  Vec grads(model.param_size());
  kernels::sample_evals(model, ds, idx, LossKind::select_ce(), true, evals,
                        grads);
  CHECK(model.predict(ds.feature(0)) == 0);
  CHECK(evals[0].selected);
}

TEST_CASE("audit on the pinned instance reproduces the suppression numbers") {
  auto inst = pinned::make();
  Vec ce_l1(static_cast<size_t>(inst.train.n));
  Vec ds_l1(static_cast<size_t>(inst.train.n));
  kernels::audit_grad_l1(inst.model, inst.train, LossKind::ce(), ce_l1);
  kernels::audit_grad_l1(inst.model, inst.train, LossKind::dspt(), ds_l1);
  double ce_noisy = 0.0, ds_noisy = 0.0;
  long noisy_n = 0;
  for (long i = 0; i < inst.train.n; ++i) {
    if (!inst.train.mask[static_cast<size_t>(i)]) continue;
    ce_noisy += ce_l1[static_cast<size_t>(i)];
    ds_noisy += ds_l1[static_cast<size_t>(i)];
    ++noisy_n;
    CHECK(ce_l1[static_cast<size_t>(i)] <= 2.0 + 1e-12);
    CHECK(ds_l1[static_cast<size_t>(i)] <= 2.0 + 1e-12);
  }
  ce_noisy /= noisy_n;
  ds_noisy /= noisy_n;
  CHECK(ce_noisy == doctest::Approx(1.9836).epsilon(1e-3));
  CHECK(ds_noisy == doctest::Approx(0.014762).epsilon(1e-3));
  CHECK(ce_noisy / ds_noisy >= 10.0);
}
