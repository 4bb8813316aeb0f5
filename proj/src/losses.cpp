#include "dspt/losses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace dspt {

namespace {

using numerics::log_sum_exp;
using numerics::softmax_into;

thread_local Vec scratch_a;
thread_local Vec scratch_b;

Vec& scratch(Vec& buf, size_t n) {
  buf.resize(n);
  return buf;
}

double check_param(double v, double lo, double hi, bool lo_open, bool hi_open,
                   const char* what) {
  const bool lo_ok = lo_open ? v > lo : v >= lo;
  const bool hi_ok = hi_open ? v < hi : v <= hi;
  if (!std::isfinite(v) || !lo_ok || !hi_ok)
    throw InvalidInputError(std::string("parameter out of range for ") + what);
  return v;
}

// CE value against an arbitrary fixed target distribution t:
// LSE(z) - sum_i t_i z_i.
double soft_target_ce_value(std::span<const double> z,
                            std::span<const double> t) {
  double dot_tz = 0.0;
  for (size_t i = 0; i < z.size(); ++i) dot_tz += t[i] * z[i];
  return log_sum_exp(z) - dot_tz;
}

// Chain rule through u = s * z/|z|: grad_z = s/|z| * (g - (g.zhat) zhat).
void project_through_normalize(std::span<const double> z, double norm,
                               double scale_over_norm, std::span<double> g) {
  double g_dot_zhat = 0.0;
  for (size_t i = 0; i < z.size(); ++i) g_dot_zhat += g[i] * z[i] / norm;
  for (size_t i = 0; i < z.size(); ++i)
    g[i] = scale_over_norm * (g[i] - g_dot_zhat * z[i] / norm);
}

double smoothing_target(double alpha, int classes, int i, int y) {
  return (i == y ? 1.0 - alpha : 0.0) + alpha / classes;
}

}  // namespace

LossKind LossKind::ce() { return {LossTag::CE, 0.0}; }
LossKind LossKind::dspt() { return {LossTag::DSPT, 0.0}; }
LossKind LossKind::smoothing(double alpha) {
  return {LossTag::Smoothing, check_param(alpha, 0.0, 1.0, true, true, "smoothing alpha")};
}
LossKind LossKind::logit_norm(double tau) {
  return {LossTag::LogitNorm, check_param(tau, 0.0, 1e300, true, false, "logitnorm tau")};
}
LossKind LossKind::logit_clip(double tau) {
  return {LossTag::LogitClip, check_param(tau, 0.0, 1e300, true, false, "logitclip tau")};
}
LossKind LossKind::bootstrap(double beta) {
  return {LossTag::Bootstrap, check_param(beta, 0.0, 1.0, true, false, "bootstrap beta")};
}
LossKind LossKind::nce() { return {LossTag::NCE, 0.0}; }
LossKind LossKind::gce(double q) {
  return {LossTag::GCE, check_param(q, 0.0, 1.0, true, false, "gce q")};
}
LossKind LossKind::square_norm() { return {LossTag::SquareNorm, 0.0}; }
LossKind LossKind::select_ce() { return {LossTag::SelectCE, 0.0}; }

LossKind LossKind::parse(const std::string& spec,
                         std::optional<double> tau_flag) {
  std::string name = spec;
  std::optional<double> param;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    name = spec.substr(0, pos);
    const std::string rest = spec.substr(pos + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc{} || ptr != rest.data() + rest.size())
      throw InvalidInputError("bad loss parameter: " + spec);
    param = v;
  }

  auto no_param = [&](LossKind k) {
    if (param) throw InvalidInputError("loss takes no parameter: " + spec);
    return k;
  };
  if (name == "ce") return no_param(ce());
  if (name == "dspt") return no_param(dspt());
  if (name == "nce") return no_param(nce());
  if (name == "squarenorm") return no_param(square_norm());
  if (name == "selectce") return no_param(select_ce());
  if (name == "smoothing") return param ? smoothing(*param) : smoothing();
  if (name == "logitnorm") return param ? logit_norm(*param) : logit_norm();
  if (name == "bootstrap") return param ? bootstrap(*param) : bootstrap();
  if (name == "gce") return param ? gce(*param) : gce();
  if (name == "logitclip") {
    if (param) return logit_clip(*param);
    if (tau_flag) return logit_clip(*tau_flag);
    throw InvalidInputError("logitclip requires a tau (logitclip:<tau> or --tau)");
  }
  throw InvalidInputError("unknown loss: " + spec);
}

std::string LossKind::name() const {
  switch (tag_) {
    case LossTag::CE: return "ce";
    case LossTag::DSPT: return "dspt";
    case LossTag::Smoothing: return "smoothing";
    case LossTag::LogitNorm: return "logitnorm";
    case LossTag::LogitClip: return "logitclip";
    case LossTag::Bootstrap: return "bootstrap";
    case LossTag::NCE: return "nce";
    case LossTag::GCE: return "gce";
    case LossTag::SquareNorm: return "squarenorm";
    case LossTag::SelectCE: return "selectce";
  }
  return "?";
}

namespace losses {

double ce_value_grad(std::span<const double> z, int y, std::span<double> grad) {
  const double lse = softmax_into(z, grad);
  grad[static_cast<size_t>(y)] -= 1.0;
  return lse - z[static_cast<size_t>(y)];
}

double dspt_value_grad(std::span<const double> z, int y, std::span<double> grad) {
  const size_t n = z.size();
  softmax_into(z, grad);  // grad holds p
  Vec& q = scratch(scratch_a, n);
  const double lse_p = softmax_into(grad, q);
  const double p_y = grad[static_cast<size_t>(y)];
  double pq = 0.0;
  for (size_t j = 0; j < n; ++j) pq += grad[j] * q[j];
  for (size_t i = 0; i < n; ++i) {
    const double delta = (static_cast<int>(i) == y) ? 1.0 : 0.0;
    grad[i] = grad[i] * ((q[i] - delta) + (p_y - pq));
  }
  return lse_p - p_y;
}

double dspt_outer_loss(std::span<const double> p, int y) noexcept {
  return log_sum_exp(p) - p[static_cast<size_t>(y)];
}

double value_grad(const LossKind& kind, std::span<const double> z, int y,
                  std::span<double> grad) {
  const size_t n = z.size();
  const size_t yy = static_cast<size_t>(y);
  switch (kind.tag()) {
    case LossTag::CE:
    case LossTag::SelectCE:
      return ce_value_grad(z, y, grad);
    case LossTag::DSPT:
      return dspt_value_grad(z, y, grad);
    case LossTag::Smoothing: {
      const double lse = softmax_into(z, grad);
      double dot_tz = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double t = smoothing_target(kind.param(), static_cast<int>(n),
                                          static_cast<int>(i), y);
        dot_tz += t * z[i];
        grad[i] -= t;
      }
      return lse - dot_tz;
    }
    case LossTag::LogitNorm: {
      const double r = numerics::l2_norm(z);
      if (r < 1e-12) {
        std::fill(grad.begin(), grad.end(),
                  std::numeric_limits<double>::quiet_NaN());
        return std::numeric_limits<double>::quiet_NaN();
      }
      const double s = 1.0 / (kind.param() * r);
      Vec& u = scratch(scratch_b, n);
      for (size_t i = 0; i < n; ++i) u[i] = z[i] * s;
      const double v = ce_value_grad(u, y, grad);
      project_through_normalize(z, r, s, grad);
      return v;
    }
    case LossTag::LogitClip: {
      const double r = numerics::l2_norm(z);
      const double tau = kind.param();
      if (r <= tau) return ce_value_grad(z, y, grad);
      const double s = tau / r;
      Vec& u = scratch(scratch_b, n);
      for (size_t i = 0; i < n; ++i) u[i] = z[i] * s;
      const double v = ce_value_grad(u, y, grad);
      project_through_normalize(z, r, s, grad);
      return v;
    }
    case LossTag::Bootstrap: {
      const double beta = kind.param();
      Vec& p = scratch(scratch_b, n);
      const double lse = softmax_into(z, p);
      double dot_tz = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double t = (static_cast<int>(i) == y ? beta : 0.0) +
                         (1.0 - beta) * p[i];
        dot_tz += t * z[i];
        grad[i] = p[i] - t;  // target detached: reduces to beta * (p - onehot)
      }
      return lse - dot_tz;
    }
    case LossTag::NCE: {
      const double lse = softmax_into(z, grad);  // grad holds p
      double sum_z = 0.0;
      for (size_t i = 0; i < n; ++i) sum_z += z[i];
      const double numer = lse - z[yy];
      const double denom = static_cast<double>(n) * lse - sum_z;
      for (size_t i = 0; i < n; ++i) {
        const double delta = (i == yy) ? 1.0 : 0.0;
        const double d_numer = grad[i] - delta;
        const double d_denom = static_cast<double>(n) * grad[i] - 1.0;
        grad[i] = (d_numer * denom - numer * d_denom) / (denom * denom);
      }
      return numer / denom;
    }
    case LossTag::GCE: {
      const double q = kind.param();
      softmax_into(z, grad);
      const double p_y = grad[yy];
      const double p_y_q = std::pow(p_y, q);
      for (size_t i = 0; i < n; ++i) {
        const double delta = (i == yy) ? 1.0 : 0.0;
        grad[i] = p_y_q * (grad[i] - delta);
      }
      return (1.0 - p_y_q) / q;
    }
    case LossTag::SquareNorm: {
      const double lse = softmax_into(z, grad);  // grad holds p
      double s2 = 0.0;
      for (size_t i = 0; i < n; ++i) s2 += grad[i] * grad[i];
      const double value = 2.0 * (lse - z[yy]) + std::log(s2);
      for (size_t i = 0; i < n; ++i) {
        const double delta = (i == yy) ? 1.0 : 0.0;
        const double p_i = grad[i];
        grad[i] = 2.0 * (p_i - delta) + 2.0 * p_i * (p_i - s2) / s2;
      }
      return value;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double value(const LossKind& kind, std::span<const double> z, int y) {
  const size_t n = z.size();
  const size_t yy = static_cast<size_t>(y);
  switch (kind.tag()) {
    case LossTag::CE:
    case LossTag::SelectCE:
      return log_sum_exp(z) - z[yy];
    case LossTag::DSPT: {
      Vec& p = scratch(scratch_b, n);
      softmax_into(z, p);
      return dspt_outer_loss(p, y);
    }
    case LossTag::LogitNorm: {
      const double r = numerics::l2_norm(z);
      if (r < 1e-12) return std::numeric_limits<double>::quiet_NaN();
      Vec& u = scratch(scratch_b, n);
      const double s = 1.0 / (kind.param() * r);
      for (size_t i = 0; i < n; ++i) u[i] = z[i] * s;
      return log_sum_exp(u) - u[yy];
    }
    case LossTag::LogitClip: {
      const double r = numerics::l2_norm(z);
      if (r <= kind.param()) return log_sum_exp(z) - z[yy];
      Vec& u = scratch(scratch_b, n);
      const double s = kind.param() / r;
      for (size_t i = 0; i < n; ++i) u[i] = z[i] * s;
      return log_sum_exp(u) - u[yy];
    }
    default: {
      Vec& g = scratch(scratch_a, n);
      return value_grad(kind, z, y, g);
    }
  }
}

}  // namespace losses

namespace {

void check_label(const LogitVector& z, int y) {
  if (y < 0 || y >= z.classes())
    throw InvalidInputError("class index out of range");
}

LossEval finish_eval(double value, Vec grad) {
  if (!std::isfinite(value) || !numerics::all_finite(grad))
    throw InvalidInputError("loss evaluation is not finite");
  return {value, std::move(grad)};
}

}  // namespace

LossEval ce_eval(const LogitVector& z, int y) {
  check_label(z, y);
  Vec grad(z.values().size());
  const double v = losses::ce_value_grad(z.span(), y, grad);
  return finish_eval(v, std::move(grad));
}

LossEval dspt_eval(const LogitVector& z, int y) {
  check_label(z, y);
  Vec grad(z.values().size());
  const double v = losses::dspt_value_grad(z.span(), y, grad);
  return finish_eval(v, std::move(grad));
}

LossEval baseline_eval(const LossKind& kind, const LogitVector& z, int y) {
  check_label(z, y);
  Vec grad(z.values().size());
  const double v = losses::value_grad(kind, z.span(), y, grad);
  return finish_eval(v, std::move(grad));
}

LossEval eval_loss(const LossKind& kind, const LogitVector& z, int y) {
  return baseline_eval(kind, z, y);
}

Vec fd_gradient(const LossKind& kind, const LogitVector& z, int y, double h) {
  check_label(z, y);
  if (!(h >= 1e-7 && h <= 1e-3))
    throw InvalidInputError("finite-difference step outside [1e-7, 1e-3]");

  const size_t n = z.values().size();
  Vec zv(z.values());
  Vec out(n);

  if (kind.tag() == LossTag::Bootstrap) {
    // Differentiate with the soft target held at the center point; this is
    // the function whose gradient the detached-target formula computes.
    Vec target(n);
    softmax_into(z.span(), target);
    const double beta = kind.param();
    for (size_t i = 0; i < n; ++i)
      target[i] = (static_cast<int>(i) == y ? beta : 0.0) +
                  (1.0 - beta) * target[i];
    for (size_t i = 0; i < n; ++i) {
      const double orig = zv[i];
      zv[i] = orig + h;
      const double up = soft_target_ce_value(zv, target);
      zv[i] = orig - h;
      const double dn = soft_target_ce_value(zv, target);
      zv[i] = orig;
      out[i] = (up - dn) / (2.0 * h);
    }
    return out;
  }

  for (size_t i = 0; i < n; ++i) {
    const double orig = zv[i];
    zv[i] = orig + h;
    const double up = losses::value(kind, zv, y);
    zv[i] = orig - h;
    const double dn = losses::value(kind, zv, y);
    zv[i] = orig;
    out[i] = (up - dn) / (2.0 * h);
  }
  return out;
}

double gradient_mismatch(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace dspt
