#pragma once

// Request traces: JSON-lines ingest/serialization and a seeded clustered
// workload generator.
//
// Trace file format (UTF-8, one JSON object per line):
//   {"dim": 768}                                    optional header, first line only
//   {"ts": 12, "id": "p-1", "res": "720p", "emb": [0.01, ...]}
// res is one of "720p", "1080p", "2k"; emb has exactly `dim` numbers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trinity/embedding.hpp"

namespace trinity::workload {

struct Request {
    std::int64_t timestamp_ms = 0;
    std::string request_id;
    Embedding embedding;
    Resolution resolution = Resolution::k720p;

    bool operator==(const Request&) const = default;
};

struct Trace {
    std::size_t dimension = 768;
    std::vector<Request> requests;  // nondecreasing timestamp_ms

    bool operator==(const Trace&) const = default;
};

/// Parses a JSON-lines trace, normalizes embeddings and stably sorts by timestamp.
/// `dimension`, when given, must agree with the header and every record.
/// Errors: ParseError, DimensionMismatch, ZeroNormEmbedding; messages carry the line number.
Trace load_trace(std::istream& in, std::optional<std::size_t> dimension = std::nullopt);
Trace load_trace_file(const std::filesystem::path& path,
                      std::optional<std::size_t> dimension = std::nullopt);

/// Writes the header line and one record per request. Embedding values are written
/// so that load_trace reproduces them bit-exactly.
void write_trace(std::ostream& out, const Trace& trace);
void write_trace_file(const std::filesystem::path& path, const Trace& trace);

struct GeneratorConfig {
    std::size_t num_requests = 1000;
    std::size_t num_clusters = 100;
    double zipf_exponent = 1.0;
    double noise_sigma = 0.05;  // expected L2 norm of the noise added to a cluster center
    std::size_t dimension = 768;
    PerResolution<double> resolution_mix{{1.0, 0.0, 0.0}};
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledTrace {
    Trace trace;
    std::vector<std::uint32_t> cluster_of;  // zero-based cluster rank per request
};

/// Cluster centers are uniform on the unit sphere; request i picks cluster rank k
/// with probability proportional to k^(-zipf_exponent), adds isotropic Gaussian
/// noise with per-coordinate deviation noise_sigma / sqrt(dimension), renormalizes,
/// and gets timestamp i ms and id "r<i>". Deterministic for a fixed config.
LabeledTrace generate_labeled_trace(const GeneratorConfig& config);
Trace generate_trace(const GeneratorConfig& config);

}  // namespace trinity::workload
