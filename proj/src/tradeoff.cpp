#include "trinity/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "trinity/error.hpp"

namespace trinity::tradeoff {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void DeficitParams::validate() const {
    if (!finite_nonneg(total_memory)) invalid("total_memory must be >= 0");
    if (!finite_nonneg(device_memory)) invalid("device_memory must be >= 0");
    if (device_count < 1) invalid("device_count must be >= 1");
    if (!finite_nonneg(deficit_bandwidth_factor)) invalid("k must be >= 0");
    if (!std::isfinite(allreduce_factor)) invalid("allreduce_factor must be finite");
    if (!std::isfinite(state_volume)) invalid("state_volume must be finite");
}

double memory_deficit(const DeficitParams& p) {
    p.validate();
    return std::max(0.0, p.total_memory - static_cast<double>(p.device_count) * p.device_memory);
}

double comm_cost(const DeficitParams& p) {
    return p.allreduce_factor * p.state_volume + p.deficit_bandwidth_factor * memory_deficit(p);
}

FrontierPoint frontier_min_bandwidth(std::span<const RateComputeSample> samples,
                                     double quality_target, double compute_budget) {
    if (samples.empty()) invalid("frontier needs at least one sample");
    std::optional<FrontierPoint> best;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!finite_nonneg(s.bandwidth) || !finite_nonneg(s.compute))
            invalid("sample " + std::to_string(i) + " has negative bandwidth or compute");
        if (s.quality < quality_target || s.compute > compute_budget) continue;
        if (!best || s.bandwidth < best->bandwidth) best = FrontierPoint{s.bandwidth, i};
    }
    if (!best)
        throw Error(ErrorKind::Infeasible,
                    "no sample reaches the quality target within the compute budget");
    return *best;
}

void validate(const HitRateModel& model) {
    std::visit(overloaded{
                   [](const ExponentialSaturation& m) {
                       if (!(m.beta > 0.0) || !std::isfinite(m.beta)) invalid("beta must be > 0");
                       if (!(m.entry_size > 0.0) || !std::isfinite(m.entry_size))
                           invalid("entry_size must be > 0");
                   },
                   [](const PowerLaw& m) {
                       if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) invalid("kappa must be > 0");
                       if (!(m.gamma > 0.0) || !std::isfinite(m.gamma)) invalid("gamma must be > 0");
                   },
                   [](const Empirical& m) {
                       if (m.points.empty()) invalid("empirical model needs at least one point");
                       for (std::size_t i = 0; i < m.points.size(); ++i) {
                           const auto [c, h] = m.points[i];
                           if (!std::isfinite(c)) invalid("empirical capacity must be finite");
                           if (!(h >= 0.0 && h <= 1.0)) invalid("empirical hit rate must be in [0,1]");
                           if (i > 0 && !(c > m.points[i - 1].first))
                               invalid("empirical capacities must be strictly increasing");
                       }
                   },
               },
               model);
}

double hit_rate(const HitRateModel& model, double capacity) {
    if (capacity < 0.0 || std::isnan(capacity))
        throw Error(ErrorKind::NegativeCapacity, "capacity must be >= 0");
    validate(model);
    const double h = std::visit(
        overloaded{
            [&](const ExponentialSaturation& m) { return -std::expm1(-m.beta * capacity / m.entry_size); },
            [&](const PowerLaw& m) { return -std::expm1(-m.gamma * std::log1p(m.kappa * capacity)); },
            [&](const Empirical& m) {
                const auto& pts = m.points;
                if (capacity <= pts.front().first) return pts.front().second;
                if (capacity >= pts.back().first) return pts.back().second;
                auto hi = std::upper_bound(pts.begin(), pts.end(), capacity,
                                           [](double c, const auto& p) { return c < p.first; });
                auto lo = std::prev(hi);
                const double t = (capacity - lo->first) / (hi->first - lo->first);
                return lo->second + t * (hi->second - lo->second);
            },
        },
        model);
    return std::clamp(h, 0.0, 1.0);
}

double hit_rate_derivative(const HitRateModel& model, double capacity) {
    if (capacity < 0.0 || std::isnan(capacity))
        throw Error(ErrorKind::NegativeCapacity, "capacity must be >= 0");
    validate(model);
    return std::visit(
        overloaded{
            [&](const ExponentialSaturation& m) {
                const double rate = m.beta / m.entry_size;
                return rate * std::exp(-rate * capacity);
            },
            [&](const PowerLaw& m) {
                return m.gamma * m.kappa * std::exp(-(m.gamma + 1.0) * std::log1p(m.kappa * capacity));
            },
            [](const Empirical&) -> double {
                throw Error(ErrorKind::NonDifferentiableModel,
                            "empirical hit-rate tables have no analytic derivative");
            },
        },
        model);
}

void CacheCostParams::validate() const {
    if (total_steps < 1) invalid("total_steps must be >= 1");
    if (!(step_cost > 0.0) || !std::isfinite(step_cost)) invalid("step_cost must be > 0");
    if (reuse_depth < 0 || reuse_depth > total_steps) invalid("reuse_depth must be in [0, total_steps]");
    if (!(entry_size > 0.0) || !std::isfinite(entry_size)) invalid("entry_size must be > 0");
}

CacheEconomics expected_compute(const CacheCostParams& cost, const HitRateModel& model,
                                double capacity) {
    cost.validate();
    CacheEconomics out;
    out.hit_rate = hit_rate(model, capacity);
    out.full_cost = static_cast<double>(cost.total_steps) * cost.step_cost;
    out.saved_per_hit = static_cast<double>(cost.reuse_depth) * cost.step_cost;
    out.expected_saved = out.hit_rate * out.saved_per_hit;
    out.expected_cost = out.full_cost - out.expected_saved;
    out.entry_count = static_cast<long long>(std::floor(capacity / cost.entry_size));
    out.saved_flops_per_gb = capacity > 0.0 ? out.expected_saved / capacity : 0.0;
    return out;
}

double marginal_benefit(const CacheCostParams& cost, const HitRateModel& model, double capacity) {
    cost.validate();
    return hit_rate_derivative(model, capacity) * static_cast<double>(cost.reuse_depth) * cost.step_cost;
}

double rms_residual(const HitRateModel& model, std::span<const HitRatePoint> points) {
    if (points.empty()) return 0.0;
    double sse = 0.0;
    for (const auto& p : points) {
        const double e = hit_rate(model, p.capacity) - p.hit_rate;
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(points.size()));
}

namespace {

void check_fit_input(std::span<const HitRatePoint> points, double entry_size) {
    if (points.size() < 3) invalid("fitting needs at least 3 points");
    if (!(entry_size > 0.0) || !std::isfinite(entry_size)) invalid("entry_size must be > 0");
    std::vector<double> caps;
    bool any_signal = false;
    for (const auto& p : points) {
        if (!(p.capacity > 0.0) || !std::isfinite(p.capacity)) invalid("capacities must be positive");
        if (p.hit_rate >= 1.0)
            throw Error(ErrorKind::DegeneratePoints, "hit rate of 1 has no finite log transform");
        if (!(p.hit_rate >= 0.0)) invalid("hit rates must be in [0,1)");
        any_signal = any_signal || p.hit_rate > 0.0;
        caps.push_back(p.capacity);
    }
    if (!any_signal) throw Error(ErrorKind::DegeneratePoints, "all hit rates are zero");
    std::sort(caps.begin(), caps.end());
    if (std::adjacent_find(caps.begin(), caps.end()) != caps.end())
        invalid("capacities must be distinct");
}

// Least-squares slope through the origin of -ln(1-h) against a transformed capacity.
template <class Transform>
double slope_through_origin(std::span<const HitRatePoint> points, Transform x_of) {
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& p : points) {
        const double x = x_of(p.capacity);
        const double y = -std::log1p(-p.hit_rate);
        sxy += x * y;
        sxx += x * x;
    }
    return sxy / sxx;
}

HitRateFit fit_power_law(std::span<const HitRatePoint> points) {
    std::vector<double> caps;
    for (const auto& p : points) caps.push_back(p.capacity);
    std::sort(caps.begin(), caps.end());
    const std::size_t n = caps.size();
    const double median = n % 2 ? caps[n / 2] : 0.5 * (caps[n / 2 - 1] + caps[n / 2]);

    constexpr int kGridPoints = 64;
    constexpr int kHalvings = 20;
    const double log_lo = std::log(1e-6 / median);
    const double log_hi = std::log(1e6 / median);
    const double grid_step = (log_hi - log_lo) / (kGridPoints - 1);

    auto evaluate = [&](double log_kappa) {
        const double kappa = std::exp(log_kappa);
        const double gamma =
            slope_through_origin(points, [kappa](double m) { return std::log1p(kappa * m); });
        const HitRateModel model = PowerLaw{kappa, gamma};
        return HitRateFit{model, rms_residual(model, points)};
    };

    double best_log = log_lo;
    HitRateFit best = evaluate(best_log);
    for (int i = 1; i < kGridPoints; ++i) {
        const double lk = log_lo + grid_step * i;
        auto fit = evaluate(lk);
        if (fit.residual < best.residual) {
            best = std::move(fit);
            best_log = lk;
        }
    }

    double step = grid_step;
    for (int level = 0; level < kHalvings; ++level) {
        step *= 0.5;
        for (int moves = 0; moves < 2 * kGridPoints; ++moves) {
            auto down = evaluate(best_log - step);
            auto up = evaluate(best_log + step);
            if (down.residual < best.residual && down.residual <= up.residual) {
                best = std::move(down);
                best_log -= step;
            } else if (up.residual < best.residual) {
                best = std::move(up);
                best_log += step;
            } else {
                break;
            }
        }
    }
    return best;
}

}  // namespace

HitRateFit fit_hit_rate(std::span<const HitRatePoint> points, HitRateFamily family,
                        double entry_size) {
    check_fit_input(points, entry_size);
    if (family == HitRateFamily::PowerLaw) return fit_power_law(points);

    const double beta =
        slope_through_origin(points, [entry_size](double m) { return m / entry_size; });
    const HitRateModel model = ExponentialSaturation{beta, entry_size};
    return HitRateFit{model, rms_residual(model, points)};
}

}  // namespace trinity::tradeoff
