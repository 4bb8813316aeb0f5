#pragma once

#include <span>
#include <vector>

#include "dspt/error.hpp"

namespace dspt {

using Vec = std::vector<double>;

// Span kernels. No validation here: callers hold the invariants (vectors are
// validated once at construction, hot loops trust them).
namespace numerics {

// exp with arguments below -745 flushed to zero so denormal tails cannot leak
// into sums.
double safe_exp(double a) noexcept;

// log(sum_i exp(z_i)) with max subtraction; exact for any non-empty span and
// stable for entries up to +-1e4.
double log_sum_exp(std::span<const double> z) noexcept;

// p_i = exp(z_i - max z) / sum_j exp(z_j - max z). In-place allowed (p == z).
// Returns log_sum_exp(z) since the pass computes it anyway.
double softmax_into(std::span<const double> z, std::span<double> p) noexcept;

// softmax applied twice. In-place allowed.
void double_softmax_into(std::span<const double> z, std::span<double> q) noexcept;

bool all_finite(std::span<const double> v) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l2_norm(std::span<const double> v) noexcept;
double l1_norm(std::span<const double> v) noexcept;

}  // namespace numerics

// Raw class scores. Finite entries, at least two classes; both checked once
// at construction.
class LogitVector {
public:
  explicit LogitVector(Vec values);

  int classes() const noexcept { return static_cast<int>(values_.size()); }
  const Vec& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  double operator[](int i) const noexcept { return values_[static_cast<size_t>(i)]; }

private:
  Vec values_;
};

// Point on the probability simplex: entries in [0,1], sum 1 within 1e-12.
class ProbVector {
public:
  explicit ProbVector(Vec values);

  int classes() const noexcept { return static_cast<int>(values_.size()); }
  const Vec& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  double operator[](int i) const noexcept { return values_[static_cast<size_t>(i)]; }

private:
  Vec values_;
};

ProbVector softmax(const LogitVector& z);
double log_sum_exp(const LogitVector& z);

// softmax(softmax(z)); every entry lies in [1/(e+C-1), e/(e+C-1)].
ProbVector double_softmax(const LogitVector& z);

}  // namespace dspt
