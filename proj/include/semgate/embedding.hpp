#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semgate {

/// Fixed-dimension real vector capturing query semantics. Values are stored
/// as 32-bit floats; all similarity arithmetic runs in 64-bit so comparisons
/// near the decision threshold do not flip from accumulation error.
class Embedding {
public:
  /// Throws ZeroVector on an empty vector or non-finite values.
  explicit Embedding(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }

private:
  std::vector<float> values_;
};

/// An Embedding with Euclidean norm 1 (within 1e-6). Produced by
/// normalize(); the cosine of two unit embeddings is their plain dot
/// product, which is the fast path the index uses.
class UnitEmbedding {
public:
  /// Validates the unit-norm invariant; throws ZeroVector if violated.
  explicit UnitEmbedding(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }

private:
  std::vector<float> values_;
};

/// cosine(a, b) = a.b / (|a| |b|), computed in double precision and clamped
/// to [-1, 1]. Throws DimensionMismatch on unequal dims and ZeroVector when
/// either norm is below 1e-12.
double cosine_similarity(const Embedding &a, const Embedding &b);

/// a / |a|. Throws ZeroVector when |a| < 1e-12.
UnitEmbedding normalize(const Embedding &a);

/// Dot product of two unit embeddings, equal to the cosine of the vectors
/// they were normalized from. Throws DimensionMismatch.
double dot(const UnitEmbedding &a, const UnitEmbedding &b);

namespace detail {
/// Double-precision dot over float spans; no validation.
double dot_raw(std::span<const float> a, std::span<const float> b) noexcept;
double norm_raw(std::span<const float> a) noexcept;

inline constexpr double kZeroNormEps = 1e-12;
inline constexpr double kUnitNormTol = 1e-6;
} // namespace detail

} // namespace semgate
