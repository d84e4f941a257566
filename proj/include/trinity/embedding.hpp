#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace trinity {

enum class Resolution { k720p, k1080p, k2k };

inline constexpr std::array<Resolution, 3> kAllResolutions{Resolution::k720p, Resolution::k1080p,
                                                           Resolution::k2k};

std::string_view to_string(Resolution r);
std::optional<Resolution> parse_resolution(std::string_view text);

/// Per-resolution table, indexed by Resolution.
template <class T>
struct PerResolution {
    std::array<T, 3> values{};

    T& operator[](Resolution r) { return values[static_cast<std::size_t>(r)]; }
    const T& operator[](Resolution r) const { return values[static_cast<std::size_t>(r)]; }
    bool operator==(const PerResolution&) const = default;
};

/// Unit-magnitude prompt embedding. Construction normalizes unless the input is
/// already within 1e-6 of unit length, so re-ingesting a stored vector is bit-exact.
class Embedding {
public:
    static constexpr double kUnitTolerance = 1e-6;

    Embedding() = default;

    /// Throws ZeroNormEmbedding for an all-zero (or non-finite) vector.
    static Embedding normalized(std::vector<float> values);

    std::span<const float> values() const { return values_; }
    std::size_t dimension() const { return values_.size(); }

    bool operator==(const Embedding&) const = default;

private:
    explicit Embedding(std::vector<float> v) : values_(std::move(v)) {}
    std::vector<float> values_;
};

/// Dot product accumulated in double, fixed summation order.
double dot(std::span<const float> a, std::span<const float> b);

double l2_norm(std::span<const float> v);

}  // namespace trinity
