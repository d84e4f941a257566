#include "trinity/embedding.hpp"

#include <cmath>

#include "trinity/error.hpp"

namespace trinity {

std::string_view to_string(Resolution r) {
    switch (r) {
        case Resolution::k720p: return "720p";
        case Resolution::k1080p: return "1080p";
        case Resolution::k2k: return "2k";
    }
    return "?";
}

std::optional<Resolution> parse_resolution(std::string_view text) {
    for (auto r : kAllResolutions)
        if (to_string(r) == text) return r;
    return std::nullopt;
}

double dot(std::span<const float> a, std::span<const float> b) {
    // Four independent lanes keep the loop vectorizable without reassociation flags.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += static_cast<double>(a[i]) * b[i];
        acc[1] += static_cast<double>(a[i + 1]) * b[i + 1];
        acc[2] += static_cast<double>(a[i + 2]) * b[i + 2];
        acc[3] += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) acc[0] += static_cast<double>(a[i]) * b[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

Embedding Embedding::normalized(std::vector<float> values) {
    const double norm = l2_norm(values);
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw Error(ErrorKind::ZeroNormEmbedding, "embedding has zero or non-finite norm");
    if (std::abs(norm - 1.0) > kUnitTolerance) {
        for (auto& x : values) x = static_cast<float>(x / norm);
    }
    return Embedding(std::move(values));
}

}  // namespace trinity
