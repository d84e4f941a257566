#pragma once

// Closed-form resource trade-off models:
//   computation <-> bandwidth  (sample-based minimal-bandwidth frontier)
//   bandwidth   <-> memory     (memory deficit and per-iteration communication)
//   memory      <-> computation (approximate-cache economics and hit-rate families)
//
// Every function here is pure; all types are plain values.

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace trinity::tradeoff {

// ---------------------------------------------------------------------------
// Bandwidth <-> memory
// ---------------------------------------------------------------------------

/// Inputs of the distributed-training memory deficit model. Memory quantities are GB.
/// `state_volume` is the combined parameter + gradient + optimizer-state volume.
struct DeficitParams {
    double total_memory = 0.0;
    int device_count = 1;
    double device_memory = 0.0;
    double allreduce_factor = 0.0;
    double state_volume = 0.0;
    double deficit_bandwidth_factor = 0.0;  // k: extra bandwidth per GB of missing memory

    void validate() const;
};

/// max(0, total - N * per_device), in GB.
double memory_deficit(const DeficitParams& p);

/// allreduce_factor * state_volume + k * deficit, in GB-equivalents per iteration.
double comm_cost(const DeficitParams& p);

// ---------------------------------------------------------------------------
// Computation <-> bandwidth
// ---------------------------------------------------------------------------

struct RateComputeSample {
    double bandwidth = 0.0;  // bits per pixel
    double compute = 0.0;    // decoder FLOPs
    double quality = 0.0;    // opaque score, higher is better
};

struct FrontierPoint {
    double bandwidth = 0.0;
    std::size_t sample_index = 0;
};

/// Minimal bandwidth over samples meeting quality >= target and compute <= budget.
/// Ties on bandwidth resolve to the lowest sample index. Throws Infeasible when no
/// sample satisfies both constraints.
FrontierPoint frontier_min_bandwidth(std::span<const RateComputeSample> samples,
                                     double quality_target, double compute_budget);

// ---------------------------------------------------------------------------
// Memory <-> computation
// ---------------------------------------------------------------------------

/// h(M) = 1 - exp(-beta * M / entry_size)
struct ExponentialSaturation {
    double beta = 0.0;
    double entry_size = 0.0;  // GB
};

/// h(M) = 1 - (1 + kappa * M)^(-gamma)
struct PowerLaw {
    double kappa = 0.0;
    double gamma = 0.0;
};

/// Piecewise-linear through (capacity GB, hit rate) points, clamped at both ends.
struct Empirical {
    std::vector<std::pair<double, double>> points;
};

using HitRateModel = std::variant<ExponentialSaturation, PowerLaw, Empirical>;

/// Throws InvalidArgument when the model violates its family's parameter constraints.
void validate(const HitRateModel& model);

/// Hit probability at `capacity` GB. Throws NegativeCapacity for capacity < 0.
double hit_rate(const HitRateModel& model, double capacity);

/// dh/dM at `capacity`. Throws NonDifferentiableModel for Empirical.
double hit_rate_derivative(const HitRateModel& model, double capacity);

struct CacheCostParams {
    int total_steps = 50;       // S
    double step_cost = 1e9;     // FLOPs per denoising step
    int reuse_depth = 0;        // r, in steps
    double entry_size = 1.0;    // GB per cache entry

    void validate() const;
};

struct CacheEconomics {
    double full_cost = 0.0;         // S * c_step
    double saved_per_hit = 0.0;     // r * c_step
    double hit_rate = 0.0;
    double expected_saved = 0.0;    // h * r * c_step
    double expected_cost = 0.0;     // full_cost - expected_saved
    long long entry_count = 0;      // floor(capacity / entry_size)
    double saved_flops_per_gb = 0.0;  // expected_saved / capacity, 0 at capacity 0
};

CacheEconomics expected_compute(const CacheCostParams& cost, const HitRateModel& model,
                                double capacity);

/// -d E[C] / dM in FLOPs per GB. Only defined for the closed-form families.
double marginal_benefit(const CacheCostParams& cost, const HitRateModel& model, double capacity);

// ---------------------------------------------------------------------------
// Hit-rate fitting
// ---------------------------------------------------------------------------

enum class HitRateFamily { ExponentialSaturation, PowerLaw };

struct HitRatePoint {
    double capacity = 0.0;  // GB
    double hit_rate = 0.0;
};

struct HitRateFit {
    HitRateModel model;
    double residual = 0.0;  // RMS error in hit-rate units
};

/// Least-squares fit of one closed-form family to measured (capacity, hit rate) points.
///
/// ExponentialSaturation regresses -ln(1-h) on M/entry_size through the origin.
/// PowerLaw scans kappa on a 64-point log grid over [1e-6, 1e6] / median(capacity),
/// solves gamma in closed form for each kappa, keeps the kappa with the smallest RMS
/// residual, then refines log(kappa) with 20 step halvings.
///
/// Requires at least 3 points, hit rates in [0,1), positive distinct capacities.
/// Throws DegeneratePoints if any hit rate is 1 or all are 0.
HitRateFit fit_hit_rate(std::span<const HitRatePoint> points, HitRateFamily family,
                        double entry_size);

/// RMS of (model(M) - h) over the points.
double rms_residual(const HitRateModel& model, std::span<const HitRatePoint> points);

}  // namespace trinity::tradeoff
