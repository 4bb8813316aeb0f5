#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dspt/model.hpp"
#include "dspt/rng.hpp"

using namespace dspt;

namespace {

std::vector<Vec> orthonormal_anchors(int classes, int dim) {
  std::vector<Vec> a(static_cast<size_t>(classes), Vec(static_cast<size_t>(dim), 0.0));
  for (int c = 0; c < classes; ++c) a[static_cast<size_t>(c)][static_cast<size_t>(c)] = 1.0;
  return a;
}

std::vector<Vec> random_anchors(rng::Xoshiro256ss& gen, int classes, int dim) {
  std::vector<Vec> a(static_cast<size_t>(classes), Vec(static_cast<size_t>(dim)));
  for (auto& row : a) {
    double n2 = 0.0;
    for (auto& v : row) {
      v = gen.normal();
      n2 += v * v;
    }
    for (auto& v : row) v /= std::sqrt(n2);
  }
  return a;
}

Vec unit(Vec v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  for (double& x : v) x /= std::sqrt(n2);
  return v;
}

}  // namespace

TEST_CASE("forward sees itself at full scale on orthogonal anchors") {
  PrototypeModel m(orthonormal_anchors(4, 6), ShiftMode::SharedShift, 30.0);
  Vec x(6, 0.0);
  x[0] = 1.0;
  const auto z = m.forward(x);
  CHECK(z[0] == doctest::Approx(30.0).epsilon(1e-12));
  for (int c = 1; c < 4; ++c) CHECK(z[c] == doctest::Approx(0.0));
  CHECK(m.zero_shot_predict(x) == 0);
}

TEST_CASE("zero shift means forward equals zero-shot for all inputs") {
  rng::Xoshiro256ss gen(11);
  PrototypeModel m(random_anchors(gen, 5, 16), ShiftMode::SharedShift, 25.0);
  for (int t = 0; t < 200; ++t) {
    Vec x(16);
    for (auto& v : x) v = gen.normal();
    x = unit(std::move(x));
    const auto z = m.forward(x);
    int arg = 0;
    for (int c = 1; c < 5; ++c)
      if (z[c] > z[arg]) arg = c;
    CHECK(arg == m.zero_shot_predict(x));
    CHECK(arg == m.predict(x));
    CHECK(std::abs(z[arg]) <= 25.0 + 1e-9);
  }
}

TEST_CASE("zero-shot ties break toward the lowest index") {
  // anchors 0 and 1 identical: scores tie exactly
  std::vector<Vec> anchors = {{1.0, 0.0}, {1.0, 0.0}};
  PrototypeModel m(anchors, ShiftMode::SharedShift, 10.0);
  CHECK(m.zero_shot_predict(Vec{1.0, 0.0}) == 0);
}

TEST_CASE("forward validates the input feature") {
  PrototypeModel m(orthonormal_anchors(3, 3), ShiftMode::SharedShift, 5.0);
  CHECK_THROWS_AS(m.forward(Vec{2.0, 0.0, 0.0}), InvalidInputError);
  CHECK_THROWS_AS(m.forward(Vec{1.0, 0.0}), InvalidInputError);
}

TEST_CASE("anchor rows must be near unit norm") {
  std::vector<Vec> bad = {{2.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(PrototypeModel(bad, ShiftMode::SharedShift, 10.0),
                  InvalidInputError);
  CHECK_THROWS_AS(PrototypeModel(orthonormal_anchors(2, 2), ShiftMode::SharedShift, 0.0),
                  InvalidInputError);
}

TEST_CASE("backward: zero upstream gives zero gradient") {
  rng::Xoshiro256ss gen(13);
  PrototypeModel m(random_anchors(gen, 3, 8), ShiftMode::SharedShift, 12.0);
  Vec x(8);
  for (auto& v : x) v = gen.normal();
  x = unit(std::move(x));
  Vec grad(m.param_size(), 0.0);
  m.backward_accumulate(x, Vec(3, 0.0), grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward matches finite differences on shift coordinates") {
  rng::Xoshiro256ss gen(17);
  for (auto mode : {ShiftMode::SharedShift, ShiftMode::PerClass}) {
    const int classes = 3, dim = 5;
    PrototypeModel m(random_anchors(gen, classes, dim), mode, 7.0);
    // move the shift off zero so normalize(anchor+shift) is nontrivial
    Vec step(m.param_size());
    for (auto& v : step) v = 0.05 * gen.normal();
    m.apply_step(step, -1.0);

    Vec x(dim);
    for (auto& v : x) v = gen.normal();
    x = unit(std::move(x));
    Vec upstream(classes);
    for (auto& v : upstream) v = gen.normal();

    Vec grad(m.param_size(), 0.0);
    m.backward_accumulate(x, upstream, grad);

    // fd on the objective upstream . z(shift)
    const double h = 1e-5;
    for (size_t j = 0; j < m.param_size(); ++j) {
      auto probe = [&](double delta) {
        PrototypeModel mc = m;
        Vec d(m.param_size(), 0.0);
        d[j] = -delta;  // apply_step subtracts
        mc.apply_step(d, 1.0);
        Vec z(static_cast<size_t>(classes));
        mc.forward_unchecked(x, z);
        double dot = 0.0;
        for (int c = 0; c < classes; ++c) dot += upstream[static_cast<size_t>(c)] * z[static_cast<size_t>(c)];
        return dot;
      };
      const double fd = (probe(h) - probe(-h)) / (2.0 * h);
      const double denom = std::max({1.0, std::abs(fd), std::abs(grad[j])});
      INFO("mode " << (mode == ShiftMode::SharedShift ? "shared" : "perclass")
                   << " coord " << j);
      CHECK(std::abs(grad[j] - fd) / denom <= 1e-4);
    }
  }
}

TEST_CASE("per-class gradient rows depend only on their class upstream") {
  rng::Xoshiro256ss gen(19);
  const int classes = 4, dim = 6;
  PrototypeModel m(random_anchors(gen, classes, dim), ShiftMode::PerClass, 9.0);
  Vec x(dim);
  for (auto& v : x) v = gen.normal();
  x = unit(std::move(x));

  Vec upstream(classes, 0.0);
  upstream[2] = 1.5;
  Vec grad(m.param_size(), 0.0);
  m.backward_accumulate(x, upstream, grad);
  for (int c = 0; c < classes; ++c) {
    double row_norm = 0.0;
    for (int j = 0; j < dim; ++j)
      row_norm += std::abs(grad[static_cast<size_t>(c) * dim + j]);
    if (c == 2)
      CHECK(row_norm > 0.0);
    else
      CHECK(row_norm == 0.0);
  }
}

TEST_CASE("anchors are frozen: training updates only the shift") {
  rng::Xoshiro256ss gen(23);
  PrototypeModel m(random_anchors(gen, 3, 4), ShiftMode::SharedShift, 5.0);
  const Vec before(m.anchor(0).begin(), m.anchor(0).end());
  Vec step(m.param_size(), 0.01);
  m.apply_step(step, 1.0);
  const Vec after(m.anchor(0).begin(), m.anchor(0).end());
  CHECK(before == after);  // byte-identical
}

TEST_CASE("scale sharpens the softmax") {
  rng::Xoshiro256ss gen(29);
  for (int t = 0; t < 100; ++t) {
    auto anchors = random_anchors(gen, 5, 12);
    Vec x(12);
    for (auto& v : x) v = gen.normal();
    x = unit(std::move(x));
    double prev_top = 0.0;
    for (double scale : {1.0, 5.0, 20.0, 60.0}) {
      PrototypeModel m(anchors, ShiftMode::SharedShift, scale);
      const auto z = m.forward(x);
      Vec p(5);
      numerics::softmax_into(z.span(), p);
      const double top = *std::max_element(p.begin(), p.end());
      CHECK(top >= prev_top - 1e-12);
      prev_top = top;
    }
  }
}

TEST_CASE("checkpoint round trip preserves the model") {
  rng::Xoshiro256ss gen(31);
  PrototypeModel m(random_anchors(gen, 4, 8), ShiftMode::PerClass, 30.0);
  Vec step(m.param_size());
  for (auto& v : step) v = 0.1 * gen.normal();
  m.apply_step(step, 1.0);

  const auto dir = std::filesystem::temp_directory_path() / "dspt_model_test";
  std::filesystem::create_directories(dir);
  const std::string p1 = (dir / "a.bin").string();
  const std::string p2 = (dir / "b.bin").string();
  m.save_checkpoint(p1);
  auto loaded = PrototypeModel::load_checkpoint(p1);
  CHECK(loaded.classes() == 4);
  CHECK(loaded.dim() == 8);
  CHECK(loaded.mode() == ShiftMode::PerClass);
  CHECK(loaded.scale() == doctest::Approx(30.0));

  // save -> load -> save is byte-stable
  loaded.save_checkpoint(p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)), {});
  std::string c2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(c1 == c2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint loader rejects malformed files") {
  const auto dir = std::filesystem::temp_directory_path() / "dspt_model_bad";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "bad.bin").string();
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTMAGIC";
  }
  CHECK_THROWS_AS(PrototypeModel::load_checkpoint(path), DataFormatError);
  {
    std::ofstream os(path, std::ios::binary);
    os << "DSPTMDL1";  // header cut short
  }
  CHECK_THROWS_AS(PrototypeModel::load_checkpoint(path), DataFormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("degenerate direction is reported, not silently NaN") {
  // shift = -anchor collapses |anchor + shift| to zero
  PrototypeModel m(orthonormal_anchors(2, 2), ShiftMode::PerClass, 3.0);
  Vec step(m.param_size(), 0.0);
  step[0] = 1.0;  // shift_0 -= 1 -> anchor_0 + shift_0 = 0
  CHECK_THROWS_AS(m.apply_step(step, 1.0), NumericAbortError);
}
