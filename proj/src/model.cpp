#include "dspt/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dspt/io.hpp"

namespace dspt {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'P', 'T', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

PrototypeModel::PrototypeModel(std::vector<Vec> anchor_rows, ShiftMode mode,
                               double scale)
    : classes_(static_cast<int>(anchor_rows.size())),
      mode_(mode),
      scale_(scale) {
  if (classes_ < 2) throw InvalidInputError("model needs at least two anchors");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidInputError("model scale must be positive");
  dim_ = static_cast<int>(anchor_rows.front().size());
  if (dim_ < 1) throw InvalidInputError("anchor dimension must be >= 1");

  anchors_.resize(static_cast<size_t>(classes_) * dim_);
  for (int c = 0; c < classes_; ++c) {
    const Vec& row = anchor_rows[static_cast<size_t>(c)];
    if (static_cast<int>(row.size()) != dim_)
      throw InvalidInputError("anchor rows have inconsistent dimensions");
    if (!numerics::all_finite(row))
      throw InvalidInputError("anchor has non-finite entries");
    const double norm = numerics::l2_norm(row);
    if (std::abs(norm - 1.0) > 1e-3)
      throw InvalidInputError("anchor row is not unit norm");
    for (int j = 0; j < dim_; ++j)
      anchors_[static_cast<size_t>(c) * dim_ + j] = row[static_cast<size_t>(j)] / norm;
  }

  shift_.assign(mode_ == ShiftMode::SharedShift
                    ? static_cast<size_t>(dim_)
                    : static_cast<size_t>(classes_) * dim_,
                0.0);
  directions_.resize(static_cast<size_t>(classes_) * dim_);
  w_norms_.resize(static_cast<size_t>(classes_));
  refresh_directions();
}

std::span<const double> PrototypeModel::anchor(int c) const {
  return {anchors_.data() + static_cast<size_t>(c) * dim_,
          static_cast<size_t>(dim_)};
}

std::span<const double> PrototypeModel::shift_row(int c) const noexcept {
  if (mode_ == ShiftMode::SharedShift)
    return {shift_.data(), static_cast<size_t>(dim_)};
  return {shift_.data() + static_cast<size_t>(c) * dim_,
          static_cast<size_t>(dim_)};
}

void PrototypeModel::refresh_directions() {
  for (int c = 0; c < classes_; ++c) {
    const auto a = anchor(c);
    const auto s = shift_row(c);
    double* dir = directions_.data() + static_cast<size_t>(c) * dim_;
    double norm_sq = 0.0;
    for (int j = 0; j < dim_; ++j) {
      dir[j] = a[static_cast<size_t>(j)] + s[static_cast<size_t>(j)];
      norm_sq += dir[j] * dir[j];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-8)
      throw NumericAbortError("degenerate class direction: |anchor+shift| < 1e-8");
    w_norms_[static_cast<size_t>(c)] = norm;
    for (int j = 0; j < dim_; ++j) dir[j] /= norm;
  }
}

void PrototypeModel::forward_unchecked(std::span<const double> x,
                                       std::span<double> z) const noexcept {
  for (int c = 0; c < classes_; ++c)
    z[static_cast<size_t>(c)] = scale_ * numerics::dot(x, direction(c));
}

void PrototypeModel::forward_into(std::span<const double> x,
                                  std::span<double> z) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidInputError("feature dimension mismatch");
  if (std::abs(numerics::l2_norm(x) - 1.0) > 1e-6)
    throw InvalidInputError("input feature is not unit norm");
  forward_unchecked(x, z);
}

LogitVector PrototypeModel::forward(std::span<const double> x) const {
  Vec z(static_cast<size_t>(classes_));
  forward_into(x, z);
  return LogitVector(std::move(z));
}

void PrototypeModel::backward_accumulate(std::span<const double> x,
                                         std::span<const double> upstream,
                                         std::span<double> grad) const noexcept {
  // z_c = scale * <x, w_c/|w_c|>  =>  dz_c/dw_c = (scale/|w_c|) (x - <x,dir_c> dir_c)
  for (int c = 0; c < classes_; ++c) {
    const double u = upstream[static_cast<size_t>(c)];
    if (u == 0.0) continue;
    const auto dir = direction(c);
    const double coef = scale_ / w_norms_[static_cast<size_t>(c)];
    const double x_dot_dir = numerics::dot(x, dir);
    double* out = mode_ == ShiftMode::SharedShift
                      ? grad.data()
                      : grad.data() + static_cast<size_t>(c) * dim_;
    for (int j = 0; j < dim_; ++j)
      out[j] += u * coef *
                (x[static_cast<size_t>(j)] - x_dot_dir * dir[static_cast<size_t>(j)]);
  }
}

int PrototypeModel::zero_shot_predict(std::span<const double> x) const {
  int best = 0;
  double best_score = numerics::dot(x, anchor(0));
  for (int c = 1; c < classes_; ++c) {
    const double s = numerics::dot(x, anchor(c));
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

int PrototypeModel::predict(std::span<const double> x) const {
  int best = 0;
  double best_score = numerics::dot(x, direction(0));
  for (int c = 1; c < classes_; ++c) {
    const double s = numerics::dot(x, direction(c));
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

void PrototypeModel::apply_step(std::span<const double> grad, double lr) {
  if (grad.size() != shift_.size())
    throw InvalidInputError("parameter gradient size mismatch");
  for (size_t i = 0; i < shift_.size(); ++i) shift_[i] -= lr * grad[i];
  refresh_directions();
}

void PrototypeModel::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataFormatError(DataFormatError::Code::Truncated,
                                 "cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  io::write_u32(os, kVersion);
  io::write_u32(os, static_cast<std::uint32_t>(classes_));
  io::write_u32(os, static_cast<std::uint32_t>(dim_));
  io::write_u32(os, mode_ == ShiftMode::SharedShift ? 0u : 1u);
  io::write_f32(os, static_cast<float>(scale_));
  for (double v : anchors_) io::write_f32(os, static_cast<float>(v));
  for (double v : shift_) io::write_f32(os, static_cast<float>(v));
  if (!os) throw DataFormatError(DataFormatError::Code::Truncated,
                                 "short write on checkpoint: " + path);
}

PrototypeModel PrototypeModel::load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataFormatError(DataFormatError::Code::Truncated,
                                 "cannot open checkpoint: " + path);
  char magic[8] = {};
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw DataFormatError(DataFormatError::Code::BadMagic,
                          "bad checkpoint magic at byte offset 0");
  std::uint32_t version = 0, classes = 0, dim = 0, mode = 0;
  float scale = 0.0f;
  if (!io::read_u32(is, version) || version != kVersion)
    throw DataFormatError(DataFormatError::Code::BadMagic,
                          "unsupported checkpoint version at byte offset 8");
  if (!io::read_u32(is, classes) || !io::read_u32(is, dim) ||
      !io::read_u32(is, mode) || !io::read_f32(is, scale))
    throw DataFormatError(DataFormatError::Code::Truncated,
                          "checkpoint header truncated at byte offset 12");
  if (classes < 2 || dim < 1 || mode > 1)
    throw DataFormatError(DataFormatError::Code::BadDimensions,
                          "bad checkpoint dimensions at byte offset 12");

  std::vector<Vec> anchors(classes, Vec(dim));
  long offset = 28;
  for (std::uint32_t c = 0; c < classes; ++c)
    for (std::uint32_t j = 0; j < dim; ++j) {
      float v = 0.0f;
      if (!io::read_f32(is, v))
        throw DataFormatError(DataFormatError::Code::Truncated,
                              "checkpoint anchors truncated at byte offset " +
                                  std::to_string(offset));
      if (!std::isfinite(v))
        throw DataFormatError(DataFormatError::Code::NonFinite,
                              "non-finite anchor at byte offset " +
                                  std::to_string(offset));
      anchors[c][j] = static_cast<double>(v);
      offset += 4;
    }

  PrototypeModel model(std::move(anchors),
                       mode == 0 ? ShiftMode::SharedShift : ShiftMode::PerClass,
                       static_cast<double>(scale));
  for (size_t i = 0; i < model.shift_.size(); ++i) {
    float v = 0.0f;
    if (!io::read_f32(is, v))
      throw DataFormatError(DataFormatError::Code::Truncated,
                            "checkpoint shift truncated at byte offset " +
                                std::to_string(offset));
    if (!std::isfinite(v))
      throw DataFormatError(DataFormatError::Code::NonFinite,
                            "non-finite shift at byte offset " +
                                std::to_string(offset));
    model.shift_[i] = static_cast<double>(v);
    offset += 4;
  }
  model.refresh_directions();
  return model;
}

}  // namespace dspt
