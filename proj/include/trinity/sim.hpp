#pragma once

// Trace replay against the approximate cache, capacity sweeps and curve fitting.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "trinity/approx_cache.hpp"
#include "trinity/tradeoff.hpp"
#include "trinity/workload.hpp"

namespace trinity::sim {

struct SimConfig {
    std::uint64_t capacity_bytes = 0;
    cache::ReuseDepthPolicy policy = cache::ReuseDepthPolicy::standard();
    std::vector<int> stored_depths{5, 10, 15, 20, 25};
    int total_steps = 50;
    PerResolution<double> step_cost{{1e9, 1e9, 1e9}};  // FLOPs per denoising step
    PerResolution<std::uint64_t> latent_bytes = cache::default_latent_bytes();
    bool insert_on_hit = false;
    bool cross_resolution_match = false;

    void validate() const;
    cache::CacheConfig cache_config(std::size_t dimension) const;
};

enum class Outcome { Hit, Miss, TooLarge };

std::string_view to_string(Outcome o);

struct RequestRecord {
    std::string request_id;
    Resolution resolution = Resolution::k720p;
    Outcome outcome = Outcome::Miss;
    std::optional<std::uint64_t> matched_id;
    std::optional<double> similarity;
    int depth = 0;
    double saved_flops = 0.0;
    std::optional<std::uint64_t> inserted_id;
    std::vector<std::uint64_t> evicted;

    bool operator==(const RequestRecord&) const = default;
};

struct ReplaySummary {
    std::uint64_t requests = 0;
    std::uint64_t hits = 0;
    double hit_rate = 0.0;
    double mean_depth_over_hits = 0.0;
    double total_saved_flops = 0.0;
    double total_full_flops = 0.0;
    double expected_cost_flops = 0.0;
    std::uint64_t peak_occupied_bytes = 0;
    std::uint64_t evictions = 0;

    bool operator==(const ReplaySummary&) const = default;
};

struct ReplayReport {
    std::vector<RequestRecord> per_request;
    ReplaySummary summary;
};

/// Replays requests in trace order: lookup; a hit saves depth * step_cost FLOPs;
/// a miss inserts the request (also hits when insert_on_hit). Requests whose entry
/// cannot fit at all are recorded as TooLarge misses. Throws DimensionMismatch.
ReplayReport replay(const workload::Trace& trace, const SimConfig& config);

/// Same replay without per-request records.
ReplaySummary replay_summary(const workload::Trace& trace, const SimConfig& config);

struct CurvePoint {
    std::uint64_t capacity_bytes = 0;
    double hit_rate = 0.0;
    double saved_flops = 0.0;
    double expected_cost_flops = 0.0;

    bool operator==(const CurvePoint&) const = default;
};

using Curve = std::vector<CurvePoint>;

/// One fresh-cache replay per capacity, rows ordered by capacity. Capacity points
/// run on up to `jobs` threads (0 = hardware concurrency); output does not depend on
/// `jobs`. Capacities must be non-empty and distinct.
Curve sweep(const workload::Trace& trace, const SimConfig& config,
            std::span<const std::uint64_t> capacities, unsigned jobs = 0);

/// CSV with header capacity_gb,hit_rate,saved_flops,expected_cost_flops.
void write_curve_csv(std::ostream& out, const Curve& curve);
Curve read_curve_csv(std::istream& in);

/// Fits a closed-form hit-rate family to the curve (capacity in GB).
tradeoff::HitRateFit fit_curve(const Curve& curve, tradeoff::HitRateFamily family,
                               double entry_size_gb);

nlohmann::ordered_json to_json(const ReplaySummary& summary);
nlohmann::ordered_json to_json(const RequestRecord& record);

/// Full report document: {"summary": {...}, "requests": [...]}; requests omitted
/// when `include_requests` is false.
nlohmann::ordered_json to_json(const ReplayReport& report, bool include_requests = true);

/// One JSON object per request, newline-terminated.
void write_request_log(std::ostream& out, const ReplayReport& report);

}  // namespace trinity::sim
