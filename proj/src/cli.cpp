#include "trinity/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "trinity/error.hpp"
#include "trinity/format.hpp"
#include "trinity/sim.hpp"
#include "trinity/tradeoff.hpp"
#include "trinity/units.hpp"
#include "trinity/workload.hpp"

namespace trinity::cli {

using nlohmann::ordered_json;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::IoError, "sha256 unavailable");
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
        if (in.eof()) break;
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

/// Everything needed to reproduce one invocation.
struct Manifest {
    std::string subcommand;
    ordered_json params = ordered_json::object();
    ordered_json inputs = ordered_json::object();
    std::optional<std::uint64_t> seed;

    void input(const std::string& path) { inputs[path] = sha256_file(path); }

    ordered_json to_json() const {
        ordered_json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["subcommand"] = subcommand;
        j["params"] = params;
        j["inputs"] = inputs;
        j["seed"] = seed ? ordered_json(*seed) : ordered_json();
        return j;
    }
};

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    f << content;
    if (!f) throw Error(ErrorKind::IoError, "failed writing " + path);
}

void write_manifest_beside(const std::string& output_path, const Manifest& m) {
    write_text_file(output_path + ".manifest.json", m.to_json().dump(2) + "\n");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) parts.push_back(cur);
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw Error(ErrorKind::InvalidArgument, "invalid " + what + " '" + text + "'");
    return v;
}

Resolution parse_res_or_throw(const std::string& text) {
    auto r = parse_resolution(text);
    if (!r) throw Error(ErrorKind::InvalidArgument, "unknown resolution '" + text + "'");
    return *r;
}

/// "720p=0.5,2k=0.5" -> per-resolution values; unspecified entries keep `base`.
PerResolution<double> parse_per_resolution(const std::string& text, PerResolution<double> base) {
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "expected res=value in '" + item + "'");
        base[parse_res_or_throw(item.substr(0, eq))] = parse_double(item.substr(eq + 1), "value");
    }
    return base;
}

/// "0.95:25,0.9:20,..." (a final depth-0 band is implied).
cache::ReuseDepthPolicy parse_policy(const std::string& text) {
    std::vector<cache::ReuseBand> bands;
    for (const auto& item : split(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "expected bound:depth in '" + item + "'");
        const double bound = parse_double(item.substr(0, colon), "similarity bound");
        const double depth = parse_double(item.substr(colon + 1), "depth");
        bands.push_back({bound, static_cast<int>(depth)});
    }
    return cache::ReuseDepthPolicy(std::move(bands));
}

std::vector<tradeoff::RateComputeSample> read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::vector<tradeoff::RateComputeSample> samples;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != "bandwidth_bpp,compute_flops,quality")
                throw Error(ErrorKind::ParseError, path + ": expected header bandwidth_bpp,compute_flops,quality");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 3)
            throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line_no) + ": expected 3 fields");
        try {
            samples.push_back({parse_double(f[0], "bandwidth"), parse_double(f[1], "compute"),
                               parse_double(f[2], "quality")});
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return samples;
}

std::vector<std::pair<double, double>> read_hit_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::vector<std::pair<double, double>> points;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            header = true;
            if (line == "capacity_gb,hit_rate") continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 2) throw Error(ErrorKind::ParseError, path + ": expected capacity_gb,hit_rate rows");
        points.emplace_back(parse_double(f[0], "capacity"), parse_double(f[1], "hit rate"));
    }
    return points;
}

// Options shared by expected-compute and marginal.
struct CostOptions {
    int steps = 50;
    double step_cost = 1e9;
    int reuse = 0;
    std::string entry_size = "1GB";
    std::string capacity = "0";
    std::string model = "exp";
    std::optional<double> hit;
    double beta = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    std::string table;

    void attach(CLI::App* sub) {
        sub->add_option("--steps", steps, "Denoising steps per full generation")->capture_default_str();
        sub->add_option("--step-cost", step_cost, "FLOPs per denoising step")->capture_default_str();
        sub->add_option("--reuse", reuse, "Reuse depth in steps")->required();
        sub->add_option("--entry-size", entry_size, "Cache entry size (e.g. 2GB)")->capture_default_str();
        sub->add_option("--capacity", capacity, "Cache capacity (e.g. 10GB)")->capture_default_str();
        sub->add_option("--model", model, "Hit-rate model: exp | power | table")
            ->check(CLI::IsMember({"exp", "power", "table"}))
            ->capture_default_str();
        sub->add_option("--hit", hit, "Fixed hit rate (overrides --model)");
        sub->add_option("--beta", beta, "Exponential saturation beta");
        sub->add_option("--kappa", kappa, "Power-law kappa (per GB)");
        sub->add_option("--gamma", gamma, "Power-law gamma");
        sub->add_option("--table", table, "CSV of capacity_gb,hit_rate points");
    }

    tradeoff::CacheCostParams cost() const {
        return {steps, step_cost, reuse, bytes_to_gb(parse_capacity_bytes(entry_size))};
    }

    double capacity_gb() const { return bytes_to_gb(parse_capacity_bytes(capacity)); }

    tradeoff::HitRateModel hit_model(Manifest& m) const {
        if (hit) return tradeoff::Empirical{{{0.0, *hit}}};
        if (model == "exp") return tradeoff::ExponentialSaturation{beta, cost().entry_size};
        if (model == "power") return tradeoff::PowerLaw{kappa, gamma};
        if (table.empty()) throw Error(ErrorKind::InvalidArgument, "--model table requires --table");
        m.input(table);
        return tradeoff::Empirical{read_hit_table_csv(table)};
    }

    void record(Manifest& m) const {
        m.params["steps"] = steps;
        m.params["step_cost"] = step_cost;
        m.params["reuse"] = reuse;
        m.params["entry_size"] = entry_size;
        m.params["capacity"] = capacity;
        if (hit) {
            m.params["hit"] = *hit;
        } else {
            m.params["model"] = model;
            if (model == "exp") m.params["beta"] = beta;
            if (model == "power") {
                m.params["kappa"] = kappa;
                m.params["gamma"] = gamma;
            }
            if (model == "table") m.params["table"] = table;
        }
    }
};

// Options shared by replay and sweep.
struct SimOptions {
    std::string trace;
    int steps = 50;
    double step_cost = 1e9;
    std::string step_costs;
    std::string policy;
    std::string depths = "5,10,15,20,25";
    bool insert_on_hit = false;
    bool cross_res = false;

    void attach(CLI::App* sub) {
        sub->add_option("--trace", trace, "JSON-lines trace file")->required();
        sub->add_option("--steps", steps, "Denoising steps per full generation")->capture_default_str();
        sub->add_option("--step-cost", step_cost, "FLOPs per step for every resolution")->capture_default_str();
        sub->add_option("--step-costs", step_costs, "Per-resolution overrides, e.g. 2k=3e9");
        sub->add_option("--policy", policy, "Reuse bands bound:depth,... (default: standard table)");
        sub->add_option("--depths", depths, "Stored latent depths")->capture_default_str();
        sub->add_flag("--insert-on-hit", insert_on_hit, "Also insert the request on a hit");
        sub->add_flag("--cross-res", cross_res, "Allow matches across resolutions");
    }

    sim::SimConfig config() const {
        sim::SimConfig c;
        c.total_steps = steps;
        PerResolution<double> costs{{step_cost, step_cost, step_cost}};
        c.step_cost = step_costs.empty() ? costs : parse_per_resolution(step_costs, costs);
        if (!policy.empty()) c.policy = parse_policy(policy);
        c.stored_depths.clear();
        for (const auto& d : split(depths, ',')) c.stored_depths.push_back(static_cast<int>(parse_double(d, "depth")));
        c.insert_on_hit = insert_on_hit;
        c.cross_resolution_match = cross_res;
        return c;
    }

    void record(Manifest& m) const {
        m.params["trace"] = trace;
        m.params["steps"] = steps;
        m.params["step_cost"] = step_cost;
        m.params["step_costs"] = step_costs;
        m.params["policy"] = policy;
        m.params["depths"] = depths;
        m.params["insert_on_hit"] = insert_on_hit;
        m.params["cross_res"] = cross_res;
        m.input(trace);
    }
};

ordered_json model_json(const tradeoff::HitRateModel& model) {
    ordered_json j;
    if (auto* e = std::get_if<tradeoff::ExponentialSaturation>(&model)) {
        j["family"] = "exp";
        j["beta"] = e->beta;
        j["entry_size_gb"] = e->entry_size;
    } else if (auto* p = std::get_if<tradeoff::PowerLaw>(&model)) {
        j["family"] = "power";
        j["kappa"] = p->kappa;
        j["gamma"] = p->gamma;
    } else {
        j["family"] = "table";
    }
    return j;
}

void emit(std::ostream& out, ordered_json result, const Manifest& m) {
    result["manifest"] = m.to_json();
    out << result.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resource trade-off models and approximate-cache simulator", kToolName};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    // deficit
    tradeoff::DeficitParams deficit;
    auto* deficit_cmd = app.add_subcommand("deficit", "Memory deficit and per-iteration communication cost");
    deficit_cmd->add_option("--total", deficit.total_memory, "Total training memory (GB)")->required();
    deficit_cmd->add_option("--devices", deficit.device_count, "Device count")->required();
    deficit_cmd->add_option("--per-device", deficit.device_memory, "Memory per device (GB)")->required();
    deficit_cmd->add_option("--k", deficit.deficit_bandwidth_factor, "Bandwidth per unit of missing memory")
        ->capture_default_str();
    deficit_cmd->add_option("--allreduce", deficit.allreduce_factor, "All-reduce cost factor")->capture_default_str();
    deficit_cmd->add_option("--state", deficit.state_volume, "Parameters + gradients + optimizer state (GB)")
        ->capture_default_str();

    // expected-compute / marginal
    CostOptions expected_opts;
    auto* expected_cmd = app.add_subcommand("expected-compute", "Expected per-request compute with a latent cache");
    expected_opts.attach(expected_cmd);
    CostOptions marginal_opts;
    auto* marginal_cmd = app.add_subcommand("marginal", "Saved FLOPs per additional GB of cache");
    marginal_opts.attach(marginal_cmd);

    // frontier
    std::string samples_path;
    double quality = 0.0;
    double budget = 0.0;
    auto* frontier_cmd = app.add_subcommand("frontier", "Minimal bandwidth for a quality target under a compute budget");
    frontier_cmd->add_option("--samples", samples_path, "CSV bandwidth_bpp,compute_flops,quality")->required();
    frontier_cmd->add_option("--quality", quality, "Quality target")->required();
    frontier_cmd->add_option("--budget", budget, "Decoder compute budget (FLOPs)")->required();

    // gen
    workload::GeneratorConfig gen;
    std::string gen_out;
    std::string mix = "720p=1";
    auto* gen_cmd = app.add_subcommand("gen", "Generate a clustered synthetic trace");
    gen_cmd->add_option("--out", gen_out, "Output trace path (JSON-lines)")->required();
    gen_cmd->add_option("--requests", gen.num_requests, "Number of requests")->capture_default_str();
    gen_cmd->add_option("--clusters", gen.num_clusters, "Number of prompt clusters")->capture_default_str();
    gen_cmd->add_option("--zipf", gen.zipf_exponent, "Zipf exponent over cluster ranks")->capture_default_str();
    gen_cmd->add_option("--sigma", gen.noise_sigma, "Noise magnitude around cluster centers")->capture_default_str();
    gen_cmd->add_option("--dim", gen.dimension, "Embedding dimension")->capture_default_str();
    gen_cmd->add_option("--mix", mix, "Resolution mix, e.g. 720p=0.5,2k=0.5")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Seed (TRINITY_SEED overrides)")->capture_default_str();

    // replay
    SimOptions replay_opts;
    std::string replay_capacity;
    std::string replay_out;
    std::string replay_log;
    auto* replay_cmd = app.add_subcommand("replay", "Replay a trace against the approximate cache");
    replay_opts.attach(replay_cmd);
    replay_cmd->add_option("--capacity", replay_capacity, "Cache capacity (e.g. 10GB)")->required();
    replay_cmd->add_option("--out", replay_out, "Write the full report JSON here");
    replay_cmd->add_option("--log", replay_log, "Write per-request JSON-lines here");

    // sweep
    SimOptions sweep_opts;
    std::string sweep_capacities;
    std::string sweep_out;
    unsigned jobs = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Hit rate and saved compute across cache capacities");
    sweep_opts.attach(sweep_cmd);
    sweep_cmd->add_option("--capacities", sweep_capacities, "Comma-separated capacities (e.g. 1GB,2GB,4GB)")->required();
    sweep_cmd->add_option("--out", sweep_out, "Write the curve CSV here");
    sweep_cmd->add_option("--jobs", jobs, "Parallel capacity points (0 = all processors)")->capture_default_str();

    // fit
    std::string curve_path;
    std::string family = "exp";
    std::string fit_entry_size;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a hit-rate family to a sweep curve");
    fit_cmd->add_option("--curve", curve_path, "Curve CSV from sweep")->required();
    fit_cmd->add_option("--family", family, "exp | power")->check(CLI::IsMember({"exp", "power"}))->capture_default_str();
    fit_cmd->add_option("--entry-size", fit_entry_size, "Entry size (e.g. 0.08GB)")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Manifest m;
        if (deficit_cmd->parsed()) {
            m.subcommand = "deficit";
            m.params = {{"total", deficit.total_memory},      {"devices", deficit.device_count},
                        {"per_device", deficit.device_memory}, {"k", deficit.deficit_bandwidth_factor},
                        {"allreduce", deficit.allreduce_factor}, {"state", deficit.state_volume}};
            const double miss = tradeoff::memory_deficit(deficit);
            ordered_json r;
            r["deficit_gb"] = miss;
            r["extra_comm_gb"] = deficit.deficit_bandwidth_factor * miss;
            r["comm_cost_gb"] = tradeoff::comm_cost(deficit);
            emit(out, std::move(r), m);
        } else if (expected_cmd->parsed()) {
            m.subcommand = "expected-compute";
            expected_opts.record(m);
            const auto model = expected_opts.hit_model(m);
            const auto e = tradeoff::expected_compute(expected_opts.cost(), model, expected_opts.capacity_gb());
            ordered_json r;
            r["full_cost_flops"] = e.full_cost;
            r["saved_per_hit_flops"] = e.saved_per_hit;
            r["hit_rate"] = e.hit_rate;
            r["expected_saved_flops"] = e.expected_saved;
            r["expected_cost_flops"] = e.expected_cost;
            r["entry_count"] = e.entry_count;
            r["saved_flops_per_gb"] = e.saved_flops_per_gb;
            emit(out, std::move(r), m);
        } else if (marginal_cmd->parsed()) {
            m.subcommand = "marginal";
            marginal_opts.record(m);
            const auto model = marginal_opts.hit_model(m);
            ordered_json r;
            r["marginal_flops_per_gb"] =
                tradeoff::marginal_benefit(marginal_opts.cost(), model, marginal_opts.capacity_gb());
            emit(out, std::move(r), m);
        } else if (frontier_cmd->parsed()) {
            m.subcommand = "frontier";
            m.params = {{"samples", samples_path}, {"quality", quality}, {"budget", budget}};
            m.input(samples_path);
            const auto samples = read_samples_csv(samples_path);
            const auto best = tradeoff::frontier_min_bandwidth(samples, quality, budget);
            ordered_json r;
            r["bandwidth_bpp"] = best.bandwidth;
            r["sample_index"] = best.sample_index;
            emit(out, std::move(r), m);
        } else if (gen_cmd->parsed()) {
            m.subcommand = "gen";
            if (const char* env = std::getenv("TRINITY_SEED"); env && *env) {
                std::uint64_t seed = 0;
                const std::string s(env);
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
                if (ec != std::errc{} || p != s.data() + s.size())
                    throw Error(ErrorKind::InvalidArgument, "TRINITY_SEED must be an unsigned integer");
                gen.seed = seed;
            }
            gen.resolution_mix = parse_per_resolution(mix, PerResolution<double>{{0.0, 0.0, 0.0}});
            m.params = {{"out", gen_out},     {"requests", gen.num_requests}, {"clusters", gen.num_clusters},
                        {"zipf", gen.zipf_exponent}, {"sigma", gen.noise_sigma}, {"dim", gen.dimension},
                        {"mix", mix}};
            m.seed = gen.seed;
            const auto trace = workload::generate_trace(gen);
            workload::write_trace_file(gen_out, trace);
            write_manifest_beside(gen_out, m);
            ordered_json r;
            r["trace"] = gen_out;
            r["requests"] = trace.requests.size();
            r["dimension"] = trace.dimension;
            r["sha256"] = sha256_file(gen_out);
            emit(out, std::move(r), m);
        } else if (replay_cmd->parsed()) {
            m.subcommand = "replay";
            replay_opts.record(m);
            m.params["capacity"] = replay_capacity;
            m.params["out"] = replay_out;
            m.params["log"] = replay_log;
            auto config = replay_opts.config();
            config.capacity_bytes = parse_capacity_bytes(replay_capacity);
            const auto trace = workload::load_trace_file(replay_opts.trace);
            const auto report = sim::replay(trace, config);
            if (!replay_out.empty()) {
                write_text_file(replay_out, sim::to_json(report).dump(2) + "\n");
                write_manifest_beside(replay_out, m);
            }
            if (!replay_log.empty()) {
                std::ostringstream log;
                sim::write_request_log(log, report);
                write_text_file(replay_log, log.str());
            }
            emit(out, sim::to_json(report, false), m);
        } else if (sweep_cmd->parsed()) {
            m.subcommand = "sweep";
            sweep_opts.record(m);
            m.params["capacities"] = sweep_capacities;
            m.params["out"] = sweep_out;
            std::vector<std::uint64_t> caps;
            for (const auto& c : split(sweep_capacities, ',')) caps.push_back(parse_capacity_bytes(c));
            const auto trace = workload::load_trace_file(sweep_opts.trace);
            const auto curve = sim::sweep(trace, sweep_opts.config(), caps, jobs);
            ordered_json r;
            if (!sweep_out.empty()) {
                std::ostringstream csv;
                sim::write_curve_csv(csv, curve);
                write_text_file(sweep_out, csv.str());
                write_manifest_beside(sweep_out, m);
                r["curve"] = sweep_out;
            } else {
                auto& rows = r["curve"] = ordered_json::array();
                for (const auto& p : curve)
                    rows.push_back({{"capacity_gb", bytes_to_gb(p.capacity_bytes)},
                                    {"hit_rate", p.hit_rate},
                                    {"saved_flops", p.saved_flops},
                                    {"expected_cost_flops", p.expected_cost_flops}});
            }
            emit(out, std::move(r), m);
        } else if (fit_cmd->parsed()) {
            m.subcommand = "fit";
            m.params = {{"curve", curve_path}, {"family", family}, {"entry_size", fit_entry_size}};
            m.input(curve_path);
            std::ifstream in(curve_path);
            if (!in) throw Error(ErrorKind::IoError, "cannot open " + curve_path);
            const auto curve = sim::read_curve_csv(in);
            const auto fam = family == "power" ? tradeoff::HitRateFamily::PowerLaw
                                               : tradeoff::HitRateFamily::ExponentialSaturation;
            const auto fit = sim::fit_curve(curve, fam, bytes_to_gb(parse_capacity_bytes(fit_entry_size)));
            ordered_json r = model_json(fit.model);
            r["residual"] = fit.residual;
            emit(out, std::move(r), m);
        }
    } catch (const Error& e) {
        ordered_json j;
        j["error"] = std::string(to_string(e.kind()));
        j["message"] = e.what();
        err << j.dump() << '\n';
        return e.kind() == ErrorKind::InvalidArgument ? 2 : 1;
    }
    return 0;
}

}  // namespace trinity::cli
