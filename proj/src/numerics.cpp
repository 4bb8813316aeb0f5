#include "dspt/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace dspt {

namespace numerics {

double safe_exp(double a) noexcept { return a < -745.0 ? 0.0 : std::exp(a); }

double log_sum_exp(std::span<const double> z) noexcept {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += safe_exp(v - m);
  return m + std::log(sum);
}

double softmax_into(std::span<const double> z, std::span<double> p) noexcept {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = safe_exp(z[i] - m);
    sum += p[i];
  }
  const double inv = 1.0 / sum;
  for (size_t i = 0; i < p.size(); ++i) p[i] *= inv;
  return m + std::log(sum);
}

void double_softmax_into(std::span<const double> z, std::span<double> q) noexcept {
  softmax_into(z, q);
  softmax_into(q, q);
}

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) noexcept {
  return std::sqrt(dot(v, v));
}

double l1_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace numerics

LogitVector::LogitVector(Vec values) : values_(std::move(values)) {
  if (values_.size() < 2)
    throw InvalidInputError("logit vector needs at least two classes");
  if (!numerics::all_finite(values_))
    throw InvalidInputError("logit vector has non-finite entries");
}

ProbVector::ProbVector(Vec values) : values_(std::move(values)) {
  if (values_.size() < 2)
    throw InvalidInputError("probability vector needs at least two classes");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidInputError("probability entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidInputError("probabilities do not sum to 1");
}

ProbVector softmax(const LogitVector& z) {
  Vec p(z.values().size());
  numerics::softmax_into(z.span(), p);
  return ProbVector(std::move(p));
}

double log_sum_exp(const LogitVector& z) {
  return numerics::log_sum_exp(z.span());
}

ProbVector double_softmax(const LogitVector& z) {
  Vec q(z.values().size());
  numerics::double_softmax_into(z.span(), q);
  return ProbVector(std::move(q));
}

}  // namespace dspt
