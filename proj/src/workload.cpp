#include "trinity/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "trinity/error.hpp"
#include "trinity/rng.hpp"

namespace trinity::workload {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(ErrorKind kind, std::size_t line, const std::string& what) {
    throw Error(kind, "line " + std::to_string(line) + ": " + what);
}

bool is_header(const json& j) { return j.is_object() && j.contains("dim") && !j.contains("emb"); }

Request parse_record(const json& j, std::size_t line, std::optional<std::size_t>& dimension) {
    if (!j.is_object()) fail_at(ErrorKind::ParseError, line, "record is not a JSON object");

    Request req;
    auto ts = j.find("ts");
    if (ts == j.end() || !ts->is_number_integer())
        fail_at(ErrorKind::ParseError, line, "'ts' must be an integer");
    req.timestamp_ms = ts->get<std::int64_t>();

    auto id = j.find("id");
    if (id == j.end() || !id->is_string()) fail_at(ErrorKind::ParseError, line, "'id' must be a string");
    req.request_id = id->get<std::string>();

    auto res = j.find("res");
    if (res == j.end() || !res->is_string()) fail_at(ErrorKind::ParseError, line, "'res' must be a string");
    auto parsed = parse_resolution(res->get_ref<const std::string&>());
    if (!parsed) fail_at(ErrorKind::ParseError, line, "unknown resolution '" + res->get<std::string>() + "'");
    req.resolution = *parsed;

    auto emb = j.find("emb");
    if (emb == j.end() || !emb->is_array()) fail_at(ErrorKind::ParseError, line, "'emb' must be an array");
    if (!dimension) dimension = emb->size();
    if (emb->size() != *dimension)
        fail_at(ErrorKind::DimensionMismatch, line,
                "embedding has " + std::to_string(emb->size()) + " values, expected " +
                    std::to_string(*dimension));

    std::vector<float> values;
    values.reserve(emb->size());
    for (const auto& v : *emb) {
        if (!v.is_number()) fail_at(ErrorKind::ParseError, line, "embedding values must be numbers");
        values.push_back(static_cast<float>(v.get<double>()));
    }
    try {
        req.embedding = Embedding::normalized(std::move(values));
    } catch (const Error& e) {
        fail_at(e.kind(), line, e.what());
    }
    return req;
}

}  // namespace

Trace load_trace(std::istream& in, std::optional<std::size_t> dimension) {
    Trace trace;
    std::string text;
    std::size_t line = 0;
    bool first_content = true;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            fail_at(ErrorKind::ParseError, line, e.what());
        }

        if (first_content && is_header(j)) {
            first_content = false;
            const auto& dim = j["dim"];
            if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0)
                fail_at(ErrorKind::ParseError, line, "'dim' must be a positive integer");
            const auto header_dim = dim.get<std::size_t>();
            if (dimension && *dimension != header_dim)
                fail_at(ErrorKind::DimensionMismatch, line,
                        "header dimension " + std::to_string(header_dim) + " differs from expected " +
                            std::to_string(*dimension));
            dimension = header_dim;
            continue;
        }
        first_content = false;
        trace.requests.push_back(parse_record(j, line, dimension));
    }
    if (in.bad()) throw Error(ErrorKind::IoError, "failed reading trace stream");

    trace.dimension = dimension.value_or(768);
    std::stable_sort(trace.requests.begin(), trace.requests.end(),
                     [](const Request& a, const Request& b) { return a.timestamp_ms < b.timestamp_ms; });
    return trace;
}

Trace load_trace_file(const std::filesystem::path& path, std::optional<std::size_t> dimension) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open trace file " + path.string());
    return load_trace(in, dimension);
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << json{{"dim", trace.dimension}}.dump() << '\n';
    for (const auto& r : trace.requests) {
        nlohmann::ordered_json rec;
        rec["ts"] = r.timestamp_ms;
        rec["id"] = r.request_id;
        rec["res"] = std::string(to_string(r.resolution));
        auto& emb = rec["emb"] = nlohmann::ordered_json::array();
        // Widening to double is exact, and the shortest double repr round-trips.
        for (float v : r.embedding.values()) emb.push_back(static_cast<double>(v));
        out << rec.dump() << '\n';
    }
}

void write_trace_file(const std::filesystem::path& path, const Trace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    write_trace(out, trace);
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

void GeneratorConfig::validate() const {
    auto invalid = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (num_clusters == 0) invalid("num_clusters must be >= 1");
    if (dimension == 0) invalid("dimension must be >= 1");
    if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) invalid("zipf_exponent must be >= 0");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) invalid("noise_sigma must be >= 0");
    double total = 0.0;
    for (double p : resolution_mix.values) {
        if (!(p >= 0.0)) invalid("resolution probabilities must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) invalid("resolution probabilities must sum to 1");
}

namespace {

std::vector<double> cumulative(std::span<const double> weights) {
    std::vector<double> cdf(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cdf.begin());
    return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
    const double target = u * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) {
        // u * total rounded up to total: take the last category with positive weight.
        it = std::lower_bound(cdf.begin(), cdf.end(), cdf.back());
    }
    return static_cast<std::size_t>(it - cdf.begin());
}

std::vector<float> random_unit_vector(Rng& rng, std::size_t dim) {
    std::vector<float> v(dim);
    for (;;) {
        for (auto& x : v) x = static_cast<float>(rng.normal());
        if (l2_norm(v) > 0.0) return v;
    }
}

}  // namespace

LabeledTrace generate_labeled_trace(const GeneratorConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const std::size_t dim = config.dimension;

    std::vector<Embedding> centers;
    centers.reserve(config.num_clusters);
    for (std::size_t k = 0; k < config.num_clusters; ++k)
        centers.push_back(Embedding::normalized(random_unit_vector(rng, dim)));

    std::vector<double> weights(config.num_clusters);
    for (std::size_t k = 0; k < weights.size(); ++k)
        weights[k] = std::pow(static_cast<double>(k + 1), -config.zipf_exponent);
    const auto cluster_cdf = cumulative(weights);
    const auto res_cdf = cumulative(config.resolution_mix.values);

    const double coord_sigma = config.noise_sigma / std::sqrt(static_cast<double>(dim));

    LabeledTrace out;
    out.trace.dimension = dim;
    out.trace.requests.reserve(config.num_requests);
    out.cluster_of.reserve(config.num_requests);
    for (std::size_t i = 0; i < config.num_requests; ++i) {
        const auto cluster = pick(cluster_cdf, rng.uniform());
        const auto res = kAllResolutions[pick(res_cdf, rng.uniform())];

        Request req;
        req.timestamp_ms = static_cast<std::int64_t>(i);
        req.request_id = "r" + std::to_string(i);
        req.resolution = res;
        if (coord_sigma > 0.0) {
            const auto center = centers[cluster].values();
            std::vector<float> v(dim);
            for (std::size_t d = 0; d < dim; ++d)
                v[d] = static_cast<float>(center[d] + coord_sigma * rng.normal());
            req.embedding = l2_norm(v) > 0.0 ? Embedding::normalized(std::move(v)) : centers[cluster];
        } else {
            req.embedding = centers[cluster];
        }
        out.trace.requests.push_back(std::move(req));
        out.cluster_of.push_back(static_cast<std::uint32_t>(cluster));
    }
    return out;
}

Trace generate_trace(const GeneratorConfig& config) { return generate_labeled_trace(config).trace; }

}  // namespace trinity::workload
