#include "dspt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dspt/io.hpp"
#include "dspt/model.hpp"
#include "dspt/rng.hpp"

namespace dspt {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'P', 'T', 'E', 'M', 'B', '1'};

Vec random_unit_vector(rng::Xoshiro256ss& gen, int dim) {
  Vec v(static_cast<size_t>(dim));
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (int j = 0; j < dim; ++j) {
      v[static_cast<size_t>(j)] = gen.normal();
      norm_sq += v[static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
    }
  } while (norm_sq < 1e-12);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

// Normalize, then snap to float32 so the DSPT-EMB round trip is lossless.
// The f32 rounding moves the norm by well under the 1e-6 invariant.
void normalize_row(double* row, int dim) {
  double norm_sq = 0.0;
  for (int j = 0; j < dim; ++j) norm_sq += row[j] * row[j];
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (int j = 0; j < dim; ++j)
    row[j] = static_cast<double>(static_cast<float>(row[j] * inv));
}

Dataset make_split(int classes, int dim, long n, Split split,
                   const std::vector<Vec>& means, double kappa,
                   rng::Xoshiro256ss& gen) {
  Dataset ds;
  ds.classes = classes;
  ds.dim = dim;
  ds.n = n;
  ds.split = split;
  ds.features.resize(static_cast<size_t>(n) * dim);
  ds.clean.resize(static_cast<size_t>(n));
  const double sigma = 1.0 / std::sqrt(kappa);
  for (long i = 0; i < n; ++i) {
    const int y = static_cast<int>(gen.below(static_cast<std::uint64_t>(classes)));
    ds.clean[static_cast<size_t>(i)] = y;
    double* row = ds.features.data() + static_cast<size_t>(i) * dim;
    const Vec& mean = means[static_cast<size_t>(y)];
    for (int j = 0; j < dim; ++j)
      row[j] = mean[static_cast<size_t>(j)] + sigma * gen.normal();
    normalize_row(row, dim);
  }
  ds.noisy = ds.clean;
  ds.mask.assign(static_cast<size_t>(n), 0);
  return ds;
}

double zero_shot_accuracy(const Dataset& ds, const std::vector<Vec>& anchors) {
  if (ds.n == 0) return 0.0;
  long correct = 0;
  for (long i = 0; i < ds.n; ++i) {
    const auto x = ds.feature(i);
    int best = 0;
    double best_score = numerics::dot(x, anchors[0]);
    for (size_t c = 1; c < anchors.size(); ++c) {
      const double s = numerics::dot(x, anchors[c]);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(c);
      }
    }
    if (best == ds.clean[static_cast<size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.n);
}

}  // namespace

void Dataset::validate() const {
  if (classes < 2) throw InvalidInputError("dataset needs C >= 2");
  if (dim < 1) throw InvalidInputError("dataset needs d >= 1");
  if (static_cast<long>(clean.size()) != n ||
      static_cast<long>(noisy.size()) != n ||
      static_cast<long>(mask.size()) != n ||
      static_cast<long>(features.size()) != n * static_cast<long>(dim))
    throw InvalidInputError("dataset arrays are inconsistent with n and d");
  for (long i = 0; i < n; ++i) {
    const int c = clean[static_cast<size_t>(i)];
    const int m = noisy[static_cast<size_t>(i)];
    if (c < 0 || c >= classes || m < 0 || m >= classes)
      throw DataFormatError(DataFormatError::Code::LabelOutOfRange,
                            "label out of range at row " + std::to_string(i));
    if ((mask[static_cast<size_t>(i)] != 0) != (c != m))
      throw InvalidInputError("corruption mask inconsistent at row " +
                              std::to_string(i));
    const auto x = feature(i);
    if (!numerics::all_finite(x))
      throw DataFormatError(DataFormatError::Code::NonFinite,
                            "non-finite feature at row " + std::to_string(i));
    if (std::abs(numerics::l2_norm(x) - 1.0) > 1e-6)
      throw DataFormatError(DataFormatError::Code::NotUnitNorm,
                            "feature row not unit norm at row " + std::to_string(i));
  }
}

SyntheticBundle gen_synthetic(int classes, int dim, long n_train, long n_test,
                              double kappa, double anchor_perturb,
                              std::uint64_t seed) {
  if (classes < 2) throw InvalidInputError("gen_synthetic needs C >= 2");
  if (dim < 1) throw InvalidInputError("gen_synthetic needs d >= 1");
  if (n_train < 0 || n_test < 0)
    throw InvalidInputError("gen_synthetic sample counts must be >= 0");
  if (!(kappa > 0.0)) throw InvalidInputError("kappa must be > 0");
  if (!(anchor_perturb >= 0.0))
    throw InvalidInputError("anchor_perturb must be >= 0");

  SyntheticBundle bundle;
  if (dim < classes)
    bundle.warning = "dim < classes: class means cannot be near-orthogonal";

  rng::Xoshiro256ss mean_gen(rng::substream(seed, rng::Stream::Means));
  std::vector<Vec> means;
  means.reserve(static_cast<size_t>(classes));
  for (int c = 0; c < classes; ++c) means.push_back(random_unit_vector(mean_gen, dim));

  // anchor_perturb is the exact perturbation magnitude: a unit direction
  // scaled by it, so zero-shot accuracy degrades smoothly in the knob
  // independent of d.
  rng::Xoshiro256ss anchor_gen(rng::substream(seed, rng::Stream::Anchors));
  bundle.anchors.reserve(static_cast<size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    Vec a = means[static_cast<size_t>(c)];
    const Vec dir = random_unit_vector(anchor_gen, dim);
    for (int j = 0; j < dim; ++j)
      a[static_cast<size_t>(j)] += anchor_perturb * dir[static_cast<size_t>(j)];
    const double norm = numerics::l2_norm(a);
    if (norm < 1e-12)
      throw InvalidInputError("degenerate anchor draw; change seed or perturb");
    for (double& x : a) x /= norm;
    bundle.anchors.push_back(std::move(a));
  }

  rng::Xoshiro256ss train_gen(rng::substream(seed, rng::Stream::TrainData));
  bundle.train = make_split(classes, dim, n_train, Split::Train, means, kappa,
                            train_gen);
  rng::Xoshiro256ss test_gen(rng::substream(seed, rng::Stream::TestData));
  bundle.test = make_split(classes, dim, n_test, Split::Test, means, kappa,
                           test_gen);

  bundle.zero_shot_train_acc = zero_shot_accuracy(bundle.train, bundle.anchors);
  bundle.zero_shot_test_acc = zero_shot_accuracy(bundle.test, bundle.anchors);
  bundle.train.validate();
  bundle.test.validate();
  return bundle;
}

void save_embeddings(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "cannot open for writing: " + path);
  os.write(kMagic, 8);
  io::write_u32(os, static_cast<std::uint32_t>(ds.n));
  io::write_u32(os, static_cast<std::uint32_t>(ds.dim));
  io::write_u32(os, static_cast<std::uint32_t>(ds.classes));
  for (double v : ds.features) io::write_f32(os, static_cast<float>(v));
  for (int label : ds.clean) io::write_u32(os, static_cast<std::uint32_t>(label));
  if (!os)
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "short write: " + path);
}

Dataset load_embeddings(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "cannot open: " + path);
  char magic[8] = {};
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw DataFormatError(DataFormatError::Code::BadMagic,
                          "bad DSPT-EMB magic at byte offset 0");
  std::uint32_t n = 0, dim = 0, classes = 0;
  if (!io::read_u32(is, n) || !io::read_u32(is, dim) || !io::read_u32(is, classes))
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "header truncated at byte offset 8");
  if (dim < 1 || classes < 2)
    throw DataFormatError(DataFormatError::Code::BadDimensions,
                          "bad dimensions in header at byte offset 8 (d=" +
                              std::to_string(dim) + ", C=" +
                              std::to_string(classes) + ")");

  Dataset ds;
  ds.n = static_cast<long>(n);
  ds.dim = static_cast<int>(dim);
  ds.classes = static_cast<int>(classes);
  ds.features.resize(static_cast<size_t>(n) * dim);
  ds.clean.resize(static_cast<size_t>(n));

  long offset = 20;
  for (size_t i = 0; i < ds.features.size(); ++i) {
    float v = 0.0f;
    if (!io::read_f32(is, v))
      throw DataFormatError(DataFormatError::Code::Truncated,
                            "features truncated at byte offset " +
                                std::to_string(offset));
    if (!std::isfinite(v))
      throw DataFormatError(DataFormatError::Code::NonFinite,
                            "non-finite feature at byte offset " +
                                std::to_string(offset));
    ds.features[i] = static_cast<double>(v);
    offset += 4;
  }
  for (size_t i = 0; i < ds.clean.size(); ++i) {
    std::uint32_t label = 0;
    if (!io::read_u32(is, label))
      throw DataFormatError(DataFormatError::Code::Truncated,
                            "labels truncated at byte offset " +
                                std::to_string(offset));
    if (label >= classes)
      throw DataFormatError(DataFormatError::Code::LabelOutOfRange,
                            "label " + std::to_string(label) +
                                " >= C at byte offset " + std::to_string(offset));
    ds.clean[i] = static_cast<int>(label);
    offset += 4;
  }

  // Rows already unit within 1e-6 are kept bit-exact; rows within 1e-3 are
  // re-normalized; anything further off is rejected as malformed.
  for (long i = 0; i < ds.n; ++i) {
    double* row = ds.features.data() + static_cast<size_t>(i) * ds.dim;
    double norm_sq = 0.0;
    for (int j = 0; j < ds.dim; ++j) norm_sq += row[j] * row[j];
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-3)
      throw DataFormatError(DataFormatError::Code::NotUnitNorm,
                            "feature row " + std::to_string(i) +
                                " has norm " + io::format_double(norm));
    if (std::abs(norm - 1.0) > 1e-6)
      for (int j = 0; j < ds.dim; ++j) row[j] /= norm;
  }

  ds.noisy = ds.clean;
  ds.mask.assign(static_cast<size_t>(ds.n), 0);
  ds.validate();
  return ds;
}

Dataset load_embeddings_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "cannot open: " + path);
  std::string header;
  if (!std::getline(is, header))
    throw DataFormatError(DataFormatError::Code::Truncated, "empty CSV file");
  if (header.rfind("label,f0", 0) != 0)
    throw DataFormatError(DataFormatError::Code::BadMagic,
                          "CSV header must start with label,f0,...");
  const long dim = static_cast<long>(std::count(header.begin(), header.end(), ',') );

  Dataset ds;
  ds.dim = static_cast<int>(dim);
  std::string line;
  long row_no = 0;
  int max_label = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    int label = 0;
    auto [lp, lec] = std::from_chars(p, end, label);
    if (lec != std::errc{} || label < 0)
      throw DataFormatError(DataFormatError::Code::LabelOutOfRange,
                            "bad label in CSV row " + std::to_string(row_no));
    p = lp;
    for (long j = 0; j < dim; ++j) {
      if (p >= end || *p != ',')
        throw DataFormatError(DataFormatError::Code::Truncated,
                              "CSV row " + std::to_string(row_no) +
                                  " has fewer than " + std::to_string(dim) +
                                  " features");
      ++p;
      double v = 0.0;
      auto [fp, fec] = std::from_chars(p, end, v);
      if (fec != std::errc{})
        throw DataFormatError(DataFormatError::Code::NonFinite,
                              "bad float in CSV row " + std::to_string(row_no));
      if (!std::isfinite(v))
        throw DataFormatError(DataFormatError::Code::NonFinite,
                              "non-finite feature in CSV row " +
                                  std::to_string(row_no));
      ds.features.push_back(v);
      p = fp;
    }
    if (p != end)
      throw DataFormatError(DataFormatError::Code::BadDimensions,
                            "trailing fields in CSV row " + std::to_string(row_no));
    ds.clean.push_back(label);
    max_label = std::max(max_label, label);
    ++row_no;
  }
  ds.n = row_no;
  ds.classes = std::max(2, max_label + 1);
  for (long i = 0; i < ds.n; ++i) {
    double* row = ds.features.data() + static_cast<size_t>(i) * ds.dim;
    double norm_sq = 0.0;
    for (int j = 0; j < ds.dim; ++j) norm_sq += row[j] * row[j];
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-3)
      throw DataFormatError(DataFormatError::Code::NotUnitNorm,
                            "CSV feature row " + std::to_string(i) +
                                " has norm " + io::format_double(norm));
    if (std::abs(norm - 1.0) > 1e-6)
      for (int j = 0; j < ds.dim; ++j) row[j] /= norm;
  }
  ds.noisy = ds.clean;
  ds.mask.assign(static_cast<size_t>(ds.n), 0);
  ds.validate();
  return ds;
}

NoiseReport apply_noise(Dataset& ds, const TransitionMatrix& t,
                        std::uint64_t seed) {
  if (ds.split != Split::Train)
    throw InvalidInputError("corruption applies to the train split only");
  if (t.classes() != ds.classes)
    throw InvalidInputError("transition matrix class count mismatch");
  auto result = corrupt(ds.clean, t, seed);
  ds.noisy = std::move(result.noisy);
  ds.mask = std::move(result.mask);
  ds.validate();
  return result.report;
}

std::vector<long> epoch_permutation(long n, std::uint64_t seed, int epoch) {
  std::vector<long> perm(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  rng::Xoshiro256ss gen(
      rng::substream(seed, rng::Stream::Batch, static_cast<std::uint64_t>(epoch)));
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(gen.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return perm;
}

std::vector<std::span<const long>> batch_slices(std::span<const long> perm,
                                                long batch_size) {
  if (batch_size < 1) throw InvalidInputError("batch size must be >= 1");
  std::vector<std::span<const long>> out;
  const long n = static_cast<long>(perm.size());
  for (long start = 0; start < n; start += batch_size) {
    const long len = std::min(batch_size, n - start);
    out.push_back(perm.subspan(static_cast<size_t>(start), static_cast<size_t>(len)));
  }
  return out;
}

}  // namespace dspt
