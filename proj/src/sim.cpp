#include "trinity/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "trinity/error.hpp"
#include "trinity/format.hpp"
#include "trinity/units.hpp"

namespace trinity::sim {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

}  // namespace

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Hit: return "Hit";
        case Outcome::Miss: return "Miss";
        case Outcome::TooLarge: return "TooLarge";
    }
    return "?";
}

void SimConfig::validate() const {
    if (total_steps < 1) invalid("total_steps must be >= 1");
    for (double c : step_cost.values)
        if (!(c > 0.0) || !std::isfinite(c)) invalid("step cost must be > 0");
    for (int d : stored_depths)
        if (d > total_steps) invalid("stored depth " + std::to_string(d) + " exceeds total_steps");
    policy.check_depths_stored(stored_depths);
    cache_config(1).validate();
}

cache::CacheConfig SimConfig::cache_config(std::size_t dimension) const {
    cache::CacheConfig c;
    c.capacity_bytes = capacity_bytes;
    c.dimension = dimension;
    c.stored_depths = stored_depths;
    c.latent_bytes = latent_bytes;
    c.cross_resolution_match = cross_resolution_match;
    return c;
}

namespace {

template <class OnRecord>
ReplaySummary run_replay(const workload::Trace& trace, const SimConfig& config, OnRecord&& on_record) {
    config.validate();
    cache::ApproxCache cache(config.cache_config(trace.dimension));

    ReplaySummary s;
    std::uint64_t depth_sum = 0;
    for (const auto& req : trace.requests) {
        RequestRecord rec;
        rec.request_id = req.request_id;
        rec.resolution = req.resolution;
        const double step_cost = config.step_cost[req.resolution];
        const bool fits = cache.config().entry_bytes(req.resolution) <= cache.capacity();

        const auto match = cache.lookup(req.embedding, req.resolution, config.policy);
        if (match) {
            rec.outcome = Outcome::Hit;
            rec.matched_id = match->entry_id;
            rec.similarity = match->similarity;
            rec.depth = match->depth;
            rec.saved_flops = static_cast<double>(match->depth) * step_cost;
            ++s.hits;
            depth_sum += static_cast<std::uint64_t>(match->depth);
        } else {
            rec.outcome = fits ? Outcome::Miss : Outcome::TooLarge;
        }

        if (fits && (!match || config.insert_on_hit)) {
            auto inserted = cache.insert(req.embedding, req.resolution);
            rec.inserted_id = inserted.entry_id;
            rec.evicted = std::move(inserted.evicted);
        }

        ++s.requests;
        s.total_saved_flops += rec.saved_flops;
        s.total_full_flops += static_cast<double>(config.total_steps) * step_cost;
        s.evictions += rec.evicted.size();
        s.peak_occupied_bytes = std::max(s.peak_occupied_bytes, cache.occupied());
        on_record(std::move(rec));
    }
    s.hit_rate = s.requests ? static_cast<double>(s.hits) / static_cast<double>(s.requests) : 0.0;
    s.mean_depth_over_hits = s.hits ? static_cast<double>(depth_sum) / static_cast<double>(s.hits) : 0.0;
    s.expected_cost_flops = s.total_full_flops - s.total_saved_flops;
    return s;
}

}  // namespace

ReplayReport replay(const workload::Trace& trace, const SimConfig& config) {
    ReplayReport report;
    report.per_request.reserve(trace.requests.size());
    report.summary = run_replay(trace, config, [&](RequestRecord&& r) { report.per_request.push_back(std::move(r)); });
    return report;
}

ReplaySummary replay_summary(const workload::Trace& trace, const SimConfig& config) {
    return run_replay(trace, config, [](RequestRecord&&) {});
}

Curve sweep(const workload::Trace& trace, const SimConfig& config,
            std::span<const std::uint64_t> capacities, unsigned jobs) {
    if (capacities.empty()) invalid("sweep needs at least one capacity");
    std::vector<std::uint64_t> sorted(capacities.begin(), capacities.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        invalid("sweep capacities must be distinct");
    config.validate();

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(sorted.size()));

    Curve curve(sorted.size());
    std::vector<std::exception_ptr> errors(sorted.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sorted.size(); i = next++) {
            try {
                SimConfig point = config;
                point.capacity_bytes = sorted[i];
                const auto s = replay_summary(trace, point);
                curve[i] = CurvePoint{sorted[i], s.hit_rate, s.total_saved_flops, s.expected_cost_flops};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return curve;
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
    out << "capacity_gb,hit_rate,saved_flops,expected_cost_flops\n";
    for (const auto& p : curve) {
        out << format_number(bytes_to_gb(p.capacity_bytes)) << ',' << format_number(p.hit_rate) << ','
            << format_number(p.saved_flops) << ',' << format_number(p.expected_cost_flops) << '\n';
    }
}

Curve read_curve_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::ParseError, "curve line " + std::to_string(line_no) + ": " + what);
    };
    Curve curve;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "capacity_gb,hit_rate,saved_flops,expected_cost_flops") fail("unexpected header");
            header_seen = true;
            continue;
        }
        double fields[4];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int f = 0; f < 4; ++f) {
            auto [next, ec] = std::from_chars(p, end, fields[f]);
            if (ec != std::errc{}) fail("malformed number");
            p = next;
            if (f < 3) {
                if (p == end || *p != ',') fail("expected 4 comma-separated fields");
                ++p;
            }
        }
        if (p != end) fail("trailing characters");
        if (fields[0] < 0.0) fail("negative capacity");
        curve.push_back(CurvePoint{gb_to_bytes(fields[0]), fields[1], fields[2], fields[3]});
    }
    if (!header_seen) throw Error(ErrorKind::ParseError, "curve file is empty");
    return curve;
}

tradeoff::HitRateFit fit_curve(const Curve& curve, tradeoff::HitRateFamily family, double entry_size_gb) {
    std::vector<tradeoff::HitRatePoint> points;
    points.reserve(curve.size());
    for (const auto& p : curve) points.push_back({bytes_to_gb(p.capacity_bytes), p.hit_rate});
    return tradeoff::fit_hit_rate(points, family, entry_size_gb);
}

nlohmann::ordered_json to_json(const ReplaySummary& s) {
    nlohmann::ordered_json j;
    j["requests"] = s.requests;
    j["hits"] = s.hits;
    j["hit_rate"] = s.hit_rate;
    j["mean_depth_over_hits"] = s.mean_depth_over_hits;
    j["total_saved_flops"] = s.total_saved_flops;
    j["total_full_flops"] = s.total_full_flops;
    j["expected_cost_flops"] = s.expected_cost_flops;
    j["peak_occupied_bytes"] = s.peak_occupied_bytes;
    j["evictions"] = s.evictions;
    return j;
}

nlohmann::ordered_json to_json(const RequestRecord& r) {
    nlohmann::ordered_json j;
    j["request_id"] = r.request_id;
    j["res"] = std::string(trinity::to_string(r.resolution));
    j["outcome"] = std::string(to_string(r.outcome));
    j["matched_id"] = r.matched_id ? nlohmann::ordered_json(*r.matched_id) : nlohmann::ordered_json();
    j["similarity"] = r.similarity ? nlohmann::ordered_json(*r.similarity) : nlohmann::ordered_json();
    j["depth"] = r.depth;
    j["saved_flops"] = r.saved_flops;
    j["inserted_id"] = r.inserted_id ? nlohmann::ordered_json(*r.inserted_id) : nlohmann::ordered_json();
    j["evicted"] = r.evicted;
    return j;
}

nlohmann::ordered_json to_json(const ReplayReport& report, bool include_requests) {
    nlohmann::ordered_json j;
    j["summary"] = to_json(report.summary);
    if (include_requests) {
        auto& arr = j["requests"] = nlohmann::ordered_json::array();
        for (const auto& r : report.per_request) arr.push_back(to_json(r));
    }
    return j;
}

void write_request_log(std::ostream& out, const ReplayReport& report) {
    for (const auto& r : report.per_request) out << to_json(r).dump() << '\n';
}

}  // namespace trinity::sim
