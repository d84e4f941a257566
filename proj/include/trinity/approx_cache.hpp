#pragma once

// Approximate (semantic) latent cache: cosine retrieval over unit embeddings, a
// similarity -> reuse-depth table, and LRU eviction under a byte budget.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trinity/embedding.hpp"

namespace trinity::cache {

/// One row of the retrieval table: similarities strictly above `lower_bound`
/// (and not claimed by an earlier band) reuse `depth` steps.
struct ReuseBand {
    double lower_bound = 0.0;
    int depth = 0;

    bool operator==(const ReuseBand&) const = default;
};

class ReuseDepthPolicy {
public:
    /// s > 0.95 -> 25, > 0.90 -> 20, > 0.85 -> 15, > 0.75 -> 10, > 0.65 -> 5, else 0.
    static ReuseDepthPolicy standard();

    /// Bands must have strictly decreasing lower bounds and nonincreasing,
    /// nonnegative depths. Similarities at or below the last bound map to depth 0.
    explicit ReuseDepthPolicy(std::vector<ReuseBand> bands);

    int depth_for(double similarity) const;
    const std::vector<ReuseBand>& bands() const { return bands_; }
    int max_depth() const;

    /// Throws InvalidArgument if some band depth > 0 is not a stored depth.
    void check_depths_stored(std::span<const int> stored_depths) const;

    bool operator==(const ReuseDepthPolicy&) const = default;

private:
    std::vector<ReuseBand> bands_;
};

inline int reuse_depth(double similarity, const ReuseDepthPolicy& policy) {
    return policy.depth_for(similarity);
}

/// Bytes per stored latent: 0.016 GB (720p), 0.04 GB (1080p), 0.07 GB (2k).
PerResolution<std::uint64_t> default_latent_bytes();

struct CacheConfig {
    std::uint64_t capacity_bytes = 0;
    std::size_t dimension = 768;
    std::vector<int> stored_depths{5, 10, 15, 20, 25};
    PerResolution<std::uint64_t> latent_bytes = default_latent_bytes();
    bool cross_resolution_match = false;

    void validate() const;

    /// Footprint of one entry: |stored_depths| latents at the entry's resolution.
    std::uint64_t entry_bytes(Resolution r) const;
};

struct CacheEntry {
    std::uint64_t entry_id = 0;
    Embedding embedding;
    Resolution resolution = Resolution::k720p;
    std::uint64_t byte_size = 0;
    std::uint64_t last_used = 0;
};

struct Match {
    std::uint64_t entry_id = 0;
    double similarity = 0.0;
    int depth = 0;
};

struct InsertResult {
    std::uint64_t entry_id = 0;
    std::vector<std::uint64_t> evicted;  // in eviction order
};

/// Single-owner cache state. Every lookup and successful insert consumes one
/// logical tick; recency is the tick of the last hit or of the insert.
class ApproxCache {
public:
    explicit ApproxCache(CacheConfig config);

    /// Scans every eligible entry for the highest cosine similarity (ties: most
    /// recently used, then lowest id). Returns the match when its reuse depth is
    /// positive and refreshes that entry's recency; otherwise a miss (nullopt).
    /// Throws DimensionMismatch.
    std::optional<Match> lookup(const Embedding& query, Resolution resolution,
                                const ReuseDepthPolicy& policy);

    /// Evicts least-recently-used entries (ties: lowest id) until the new entry fits,
    /// then stores it. Throws EntryTooLarge, leaving the state untouched, when the
    /// entry exceeds the whole capacity; throws DimensionMismatch.
    InsertResult insert(Embedding embedding, Resolution resolution);

    const CacheConfig& config() const { return config_; }
    std::uint64_t capacity() const { return config_.capacity_bytes; }
    std::uint64_t occupied() const { return occupied_; }
    std::uint64_t tick() const { return tick_; }
    std::span<const CacheEntry> entries() const { return entries_; }
    const CacheEntry* find(std::uint64_t entry_id) const;

private:
    void check_dimension(const Embedding& e) const;

    CacheConfig config_;
    std::vector<CacheEntry> entries_;
    std::uint64_t occupied_ = 0;
    std::uint64_t tick_ = 0;
    std::uint64_t next_id_ = 0;
};

}  // namespace trinity::cache
