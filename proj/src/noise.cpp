#include "dspt/noise.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "dspt/io.hpp"
#include "dspt/rng.hpp"

namespace dspt {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw InvalidInputError("noise rate must lie in [0,1]");
}

}  // namespace

TransitionMatrix::TransitionMatrix(int classes, Kind kind, double eta,
                                   std::vector<double> entries)
    : classes_(classes), kind_(kind), eta_(eta), entries_(std::move(entries)) {
  if (classes_ < 2) throw InvalidInputError("transition matrix needs C >= 2");
  validate_columns();
}

void TransitionMatrix::validate_columns() const {
  for (int k = 0; k < classes_; ++k) {
    double sum = 0.0;
    for (int j = 0; j < classes_; ++j) {
      const double v = entry(j, k);
      if (!(v >= 0.0)) throw InvalidInputError("negative transition entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw InvalidInputError("transition matrix column does not sum to 1");
  }
}

TransitionMatrix TransitionMatrix::symmetric(int classes, double eta) {
  check_eta(eta);
  if (classes < 2) throw InvalidInputError("transition matrix needs C >= 2");
  std::vector<double> e(static_cast<size_t>(classes) * classes,
                        eta / (classes - 1));
  for (int k = 0; k < classes; ++k)
    e[static_cast<size_t>(k) * classes + k] = 1.0 - eta;
  return TransitionMatrix(classes, Kind::Symmetric, eta, std::move(e));
}

TransitionMatrix TransitionMatrix::pair_flip(int classes, double eta,
                                             std::vector<int> mapping) {
  check_eta(eta);
  if (classes < 2) throw InvalidInputError("transition matrix needs C >= 2");
  if (static_cast<int>(mapping.size()) != classes)
    throw InvalidInputError("pair-flip mapping size mismatch");
  std::vector<std::uint8_t> seen(static_cast<size_t>(classes), 0);
  for (int k = 0; k < classes; ++k) {
    const int m = mapping[static_cast<size_t>(k)];
    if (m < 0 || m >= classes || seen[static_cast<size_t>(m)])
      throw InvalidInputError("pair-flip mapping is not a permutation");
    if (m == k)
      throw InvalidInputError("pair-flip mapping has a fixed point");
    seen[static_cast<size_t>(m)] = 1;
  }
  std::vector<double> e(static_cast<size_t>(classes) * classes, 0.0);
  for (int k = 0; k < classes; ++k) {
    e[static_cast<size_t>(k) * classes + k] = 1.0 - eta;
    e[static_cast<size_t>(mapping[static_cast<size_t>(k)]) * classes + k] = eta;
  }
  return TransitionMatrix(classes, Kind::PairFlip, eta, std::move(e));
}

TransitionMatrix TransitionMatrix::pair_flip(int classes, double eta) {
  std::vector<int> cycle(static_cast<size_t>(classes));
  for (int k = 0; k < classes; ++k) cycle[static_cast<size_t>(k)] = (k + 1) % classes;
  return pair_flip(classes, eta, std::move(cycle));
}

TransitionMatrix TransitionMatrix::general(int classes,
                                           std::vector<double> entries) {
  if (entries.size() != static_cast<size_t>(classes) * classes)
    throw InvalidInputError("transition matrix entry count mismatch");
  return TransitionMatrix(classes, Kind::General,
                          std::numeric_limits<double>::quiet_NaN(),
                          std::move(entries));
}

bool TransitionMatrix::symmetric_rate_admissible() const noexcept {
  return kind_ == Kind::Symmetric && eta_ < 1.0 - 1.0 / classes_;
}

bool TransitionMatrix::diagonally_dominant_columns() const noexcept {
  for (int k = 0; k < classes_; ++k)
    for (int j = 0; j < classes_; ++j)
      if (j != k && entry(j, k) > entry(k, k)) return false;
  return true;
}

std::string NoiseReport::to_json_string(int indent) const {
  std::ostringstream os;
  (void)indent;
  os << "{\"requested_rate\":" << io::format_double(requested_rate)
     << ",\"empirical_rate\":" << io::format_double(empirical_rate)
     << ",\"per_class_flips\":[";
  for (size_t k = 0; k < per_class_flips.size(); ++k) {
    if (k) os << ",";
    os << per_class_flips[k];
  }
  os << "]}";
  return os.str();
}

CorruptionResult corrupt(std::span<const int> labels,
                         const TransitionMatrix& t, std::uint64_t seed) {
  const int classes = t.classes();
  const long n = static_cast<long>(labels.size());
  CorruptionResult result;
  result.noisy.resize(labels.size());
  result.mask.resize(labels.size());
  result.report.requested_rate = t.rate();
  result.report.per_class_flips.assign(static_cast<size_t>(classes), 0);

  for (long i = 0; i < n; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= classes)
      throw InvalidInputError("label out of range for transition matrix");
  }

  // One uniform draw per sample from its own counter-based stream; the loop
  // is order-free and safe to parallelize.
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    rng::Xoshiro256ss gen(rng::substream(seed, static_cast<std::uint64_t>(i)));
    const double u = gen.uniform();
    double cum = 0.0;
    int drawn = classes - 1;  // guards against rounding at the top end
    for (int j = 0; j < classes; ++j) {
      cum += t.entry(j, y);
      if (u < cum) {
        drawn = j;
        break;
      }
    }
    result.noisy[static_cast<size_t>(i)] = drawn;
    result.mask[static_cast<size_t>(i)] = (drawn != y) ? 1 : 0;
  }

  long flipped = 0;
  for (long i = 0; i < n; ++i) {
    if (result.mask[static_cast<size_t>(i)]) {
      ++flipped;
      ++result.report.per_class_flips[static_cast<size_t>(
          labels[static_cast<size_t>(i)])];
    }
  }
  result.report.empirical_rate =
      n > 0 ? static_cast<double>(flipped) / static_cast<double>(n) : 0.0;
  return result;
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
  NoiseSpec spec;
  if (text == "none") return spec;
  auto parse_rate = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !(v >= 0.0 && v <= 1.0))
      throw InvalidInputError("bad noise rate: " + text);
    return v;
  };
  if (text.rfind("sym:", 0) == 0) {
    spec.kind = Kind::Symmetric;
    spec.eta = parse_rate(text.substr(4));
    return spec;
  }
  if (text.rfind("pair:", 0) == 0) {
    std::string rest = text.substr(5);
    if (auto pos = rest.find(':'); pos != std::string::npos) {
      const std::string opt = rest.substr(pos + 1);
      if (opt != "mapping=cycle")
        throw InvalidInputError("unsupported pair-flip mapping: " + text);
      rest = rest.substr(0, pos);
    }
    spec.kind = Kind::PairFlip;
    spec.eta = parse_rate(rest);
    return spec;
  }
  throw InvalidInputError("bad noise spec (want none|sym:<rate>|pair:<rate>): " +
                          text);
}

std::string NoiseSpec::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Symmetric: return "sym:" + io::format_double(eta);
    case Kind::PairFlip: return "pair:" + io::format_double(eta);
  }
  return "?";
}

}  // namespace dspt
