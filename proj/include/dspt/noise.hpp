#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dspt/error.hpp"

namespace dspt {

// Column-stochastic noise model: entry(j, k) = Pr(noisy = j | clean = k).
class TransitionMatrix {
public:
  enum class Kind { Symmetric, PairFlip, General };

  // Diagonal 1-eta, every off-diagonal eta/(C-1).
  static TransitionMatrix symmetric(int classes, double eta);

  // Diagonal 1-eta, eta on mapping[k] per column; mapping must be a
  // fixed-point-free permutation. Default mapping: k -> (k+1) mod C.
  static TransitionMatrix pair_flip(int classes, double eta,
                                    std::vector<int> mapping);
  static TransitionMatrix pair_flip(int classes, double eta);

  // Arbitrary column-stochastic matrix (used by the risk-bound checks).
  static TransitionMatrix general(int classes, std::vector<double> entries);

  double entry(int j, int k) const noexcept {
    return entries_[static_cast<size_t>(j) * classes_ + static_cast<size_t>(k)];
  }
  int classes() const noexcept { return classes_; }
  Kind kind() const noexcept { return kind_; }
  double rate() const noexcept { return eta_; }

  // Precondition flags surfaced for the risk-bound theorems.
  bool symmetric_rate_admissible() const noexcept;       // eta < 1 - 1/C
  bool diagonally_dominant_columns() const noexcept;     // T_jk <= T_kk, j != k

private:
  TransitionMatrix(int classes, Kind kind, double eta,
                   std::vector<double> entries);
  void validate_columns() const;

  int classes_;
  Kind kind_;
  double eta_;                   // NaN for general matrices
  std::vector<double> entries_;  // row-major C x C
};

struct NoiseReport {
  double requested_rate = 0.0;
  double empirical_rate = 0.0;
  std::vector<long> per_class_flips;  // flips out of clean class k
  std::string to_json_string(int indent = -1) const;
};

struct CorruptionResult {
  std::vector<int> noisy;
  std::vector<std::uint8_t> mask;  // mask[i] = (noisy[i] != labels[i])
  NoiseReport report;
};

// Samples noisy[i] from column labels[i] of T by inverse CDF, one uniform
// draw per sample from a counter-based stream, so the result is independent
// of evaluation order.
CorruptionResult corrupt(std::span<const int> labels, const TransitionMatrix& t,
                         std::uint64_t seed);

// Noise spec grammar: "none", "sym:<rate>", "pair:<rate>[:mapping=cycle]".
struct NoiseSpec {
  enum class Kind { None, Symmetric, PairFlip };
  Kind kind = Kind::None;
  double eta = 0.0;

  static NoiseSpec parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace dspt
