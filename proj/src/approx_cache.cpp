#include "trinity/approx_cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trinity/error.hpp"

namespace trinity::cache {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

}  // namespace

ReuseDepthPolicy ReuseDepthPolicy::standard() {
    return ReuseDepthPolicy({{0.95, 25},
                             {0.90, 20},
                             {0.85, 15},
                             {0.75, 10},
                             {0.65, 5},
                             {-std::numeric_limits<double>::infinity(), 0}});
}

ReuseDepthPolicy::ReuseDepthPolicy(std::vector<ReuseBand> bands) : bands_(std::move(bands)) {
    if (bands_.empty()) invalid("reuse policy needs at least one band");
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        if (std::isnan(bands_[i].lower_bound)) invalid("reuse band bound is NaN");
        if (bands_[i].depth < 0) invalid("reuse depth must be >= 0");
        if (i == 0) continue;
        if (!(bands_[i].lower_bound < bands_[i - 1].lower_bound))
            invalid("reuse band bounds must be strictly decreasing");
        if (bands_[i].depth > bands_[i - 1].depth) invalid("reuse depths must be nonincreasing");
    }
}

int ReuseDepthPolicy::depth_for(double similarity) const {
    for (const auto& band : bands_)
        if (similarity > band.lower_bound) return band.depth;
    return 0;
}

int ReuseDepthPolicy::max_depth() const { return bands_.front().depth; }

void ReuseDepthPolicy::check_depths_stored(std::span<const int> stored_depths) const {
    for (const auto& band : bands_) {
        if (band.depth == 0) continue;
        if (std::find(stored_depths.begin(), stored_depths.end(), band.depth) == stored_depths.end())
            invalid("reuse depth " + std::to_string(band.depth) + " is not a stored latent depth");
    }
}

PerResolution<std::uint64_t> default_latent_bytes() {
    PerResolution<std::uint64_t> sizes;
    sizes[Resolution::k720p] = 16'000'000;
    sizes[Resolution::k1080p] = 40'000'000;
    sizes[Resolution::k2k] = 70'000'000;
    return sizes;
}

void CacheConfig::validate() const {
    if (dimension == 0) invalid("embedding dimension must be positive");
    if (stored_depths.empty()) invalid("at least one stored depth is required");
    auto sorted = stored_depths;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() <= 0) invalid("stored depths must be positive");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        invalid("stored depths must be distinct");
    for (auto r : kAllResolutions)
        if (latent_bytes[r] == 0) invalid("latent size must be positive");
}

std::uint64_t CacheConfig::entry_bytes(Resolution r) const {
    return static_cast<std::uint64_t>(stored_depths.size()) * latent_bytes[r];
}

ApproxCache::ApproxCache(CacheConfig config) : config_(std::move(config)) { config_.validate(); }

void ApproxCache::check_dimension(const Embedding& e) const {
    if (e.dimension() != config_.dimension)
        throw Error(ErrorKind::DimensionMismatch,
                    "embedding has dimension " + std::to_string(e.dimension()) + ", cache expects " +
                        std::to_string(config_.dimension));
}

std::optional<Match> ApproxCache::lookup(const Embedding& query, Resolution resolution,
                                         const ReuseDepthPolicy& policy) {
    check_dimension(query);
    const std::uint64_t now = tick_++;

    CacheEntry* best = nullptr;
    double best_sim = 0.0;
    for (auto& entry : entries_) {
        if (!config_.cross_resolution_match && entry.resolution != resolution) continue;
        const double sim = dot(query.values(), entry.embedding.values());
        const bool better = best == nullptr || sim > best_sim ||
                            (sim == best_sim && (entry.last_used > best->last_used ||
                                                 (entry.last_used == best->last_used &&
                                                  entry.entry_id < best->entry_id)));
        if (better) {
            best = &entry;
            best_sim = sim;
        }
    }
    if (best == nullptr) return std::nullopt;

    const int depth = policy.depth_for(best_sim);
    if (depth <= 0) return std::nullopt;
    best->last_used = now;
    return Match{best->entry_id, best_sim, depth};
}

InsertResult ApproxCache::insert(Embedding embedding, Resolution resolution) {
    check_dimension(embedding);
    const std::uint64_t size = config_.entry_bytes(resolution);
    if (size > config_.capacity_bytes)
        throw Error(ErrorKind::EntryTooLarge, "entry of " + std::to_string(size) +
                                                  " bytes exceeds cache capacity of " +
                                                  std::to_string(config_.capacity_bytes));

    InsertResult result;
    while (occupied_ + size > config_.capacity_bytes) {
        auto victim = std::min_element(entries_.begin(), entries_.end(),
                                       [](const CacheEntry& a, const CacheEntry& b) {
                                           if (a.last_used != b.last_used) return a.last_used < b.last_used;
                                           return a.entry_id < b.entry_id;
                                       });
        result.evicted.push_back(victim->entry_id);
        occupied_ -= victim->byte_size;
        *victim = std::move(entries_.back());
        entries_.pop_back();
    }

    result.entry_id = next_id_++;
    entries_.push_back(CacheEntry{result.entry_id, std::move(embedding), resolution, size, tick_++});
    occupied_ += size;
    return result;
}

const CacheEntry* ApproxCache::find(std::uint64_t entry_id) const {
    for (const auto& e : entries_)
        if (e.entry_id == entry_id) return &e;
    return nullptr;
}

}  // namespace trinity::cache
