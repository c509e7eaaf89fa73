#include "semgate/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "semgate/errors.hpp"

namespace semgate {

namespace detail {

double dot_raw(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double norm_raw(std::span<const float> a) noexcept {
  return std::sqrt(dot_raw(a, a));
}

} // namespace detail

namespace {

void require_finite(const std::vector<float> &values) {
  if (values.empty()) {
    throw ZeroVector("embedding must have at least one value");
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw ZeroVector("embedding contains a non-finite value");
    }
  }
}

} // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  require_finite(values_);
}

UnitEmbedding::UnitEmbedding(std::vector<float> values)
    : values_(std::move(values)) {
  require_finite(values_);
  const double norm = detail::norm_raw(values_);
  if (std::abs(norm - 1.0) > detail::kUnitNormTol) {
    throw ZeroVector("vector is not unit-norm");
  }
}

double cosine_similarity(const Embedding &a, const Embedding &b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("cosine_similarity: dims " +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
  const double norm_a = detail::norm_raw(a.values());
  const double norm_b = detail::norm_raw(b.values());
  if (norm_a < detail::kZeroNormEps || norm_b < detail::kZeroNormEps) {
    throw ZeroVector("cosine_similarity: zero-norm operand");
  }
  const double sim = detail::dot_raw(a.values(), b.values()) / (norm_a * norm_b);
  return std::clamp(sim, -1.0, 1.0);
}

UnitEmbedding normalize(const Embedding &a) {
  const double norm = detail::norm_raw(a.values());
  if (norm < detail::kZeroNormEps) {
    throw ZeroVector("normalize: zero-norm input");
  }
  std::vector<float> scaled(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    scaled[i] = static_cast<float>(static_cast<double>(a.values()[i]) / norm);
  }
  return UnitEmbedding(std::move(scaled));
}

double dot(const UnitEmbedding &a, const UnitEmbedding &b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("dot: dims " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
  return detail::dot_raw(a.values(), b.values());
}

} // namespace semgate
