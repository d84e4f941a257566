#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "trinity/error.hpp"
#include "trinity/tradeoff.hpp"

using namespace trinity;
using namespace trinity::tradeoff;
using Catch::Approx;

namespace {

DeficitParams deficit_params(double total, int n, double per_device, double k = 0.0, double allreduce = 0.0,
                             double state = 0.0) {
    DeficitParams p;
    p.total_memory = total;
    p.device_count = n;
    p.device_memory = per_device;
    p.deficit_bandwidth_factor = k;
    p.allreduce_factor = allreduce;
    p.state_volume = state;
    return p;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected trinity::Error");
    return ErrorKind::InvalidArgument;
}

// Three-point rate/compute curve: H.264-style dense stream, then two generative decoders.
const std::vector<RateComputeSample> kCodecSamples{{0.15, 1e9, 1.0}, {0.075, 1.4e10, 1.0}, {0.0375, 1e11, 1.0}};

}  // namespace

TEST_CASE("memory deficit", "[tradeoff][deficit]") {
    CHECK(memory_deficit(deficit_params(400, 2, 100)) == 200.0);
    CHECK(memory_deficit(deficit_params(100, 4, 100)) == 0.0);
    CHECK(memory_deficit(deficit_params(1000, 3, 128)) == 616.0);

    SECTION("rejects impossible configurations") {
        CHECK(kind_of([] { memory_deficit(deficit_params(100, 0, 10)); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([] { memory_deficit(deficit_params(-1, 1, 10)); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([] { memory_deficit(deficit_params(10, 1, 10, -0.5)); }) == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("communication cost", "[tradeoff][deficit]") {
    CHECK(comm_cost(deficit_params(400, 2, 100, 0.5)) == 100.0);
    CHECK(comm_cost(deficit_params(400, 2, 100, 0.0, 2.0, 10.0)) == 20.0);
    CHECK(comm_cost(deficit_params(5, 1, 1, 0.0, 2.0, 10.0)) == 20.0);
    CHECK(comm_cost(deficit_params(400, 2, 100, 0.5, 2.0, 10.0)) == 120.0);
}

TEST_CASE("deficit properties", "[tradeoff][deficit][property]") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> mem(0.0, 2000.0), small(0.0, 4.0);
    std::uniform_int_distribution<int> devices(1, 16);
    for (int i = 0; i < 500; ++i) {
        auto p = deficit_params(mem(gen), devices(gen), mem(gen) / 4, small(gen), small(gen), mem(gen));
        const double d = memory_deficit(p);
        CHECK(d >= 0.0);
        if (p.device_count * p.device_memory >= p.total_memory) CHECK(d == 0.0);

        auto more_k = p;
        more_k.deficit_bandwidth_factor += small(gen);
        CHECK(comm_cost(more_k) >= comm_cost(p));

        auto more_total = p;
        more_total.total_memory += mem(gen);
        CHECK(comm_cost(more_total) >= comm_cost(p));

        auto more_state = p;
        more_state.state_volume += 10.0;
        CHECK(comm_cost(more_state) - comm_cost(p) == Approx(10.0 * p.allreduce_factor).margin(1e-9));
    }
}

TEST_CASE("frontier on the codec example", "[tradeoff][frontier]") {
    CHECK(frontier_min_bandwidth(kCodecSamples, 1.0, 1e9).bandwidth == 0.15);
    CHECK(frontier_min_bandwidth(kCodecSamples, 1.0, 1.4e10).bandwidth == 0.075);
    CHECK(frontier_min_bandwidth(kCodecSamples, 1.0, 1.4e10).sample_index == 1);
    CHECK(frontier_min_bandwidth(kCodecSamples, 1.0, 1e11).bandwidth == 0.0375);
    CHECK(kind_of([] { frontier_min_bandwidth(kCodecSamples, 1.0, 1e8); }) == ErrorKind::Infeasible);
    CHECK(kind_of([] { frontier_min_bandwidth(kCodecSamples, 1.5, 1e12); }) == ErrorKind::Infeasible);
    CHECK(kind_of([] { frontier_min_bandwidth({}, 1.0, 1e12); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("frontier is monotone in budget and quality target", "[tradeoff][frontier][property]") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> bw(0.01, 0.5), logc(8.0, 12.0), q(0.0, 1.0);
    auto b_star = [](const std::vector<RateComputeSample>& s, double target, double budget) {
        try {
            return frontier_min_bandwidth(s, target, budget).bandwidth;
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RateComputeSample> samples(1 + trial % 12);
        for (auto& s : samples) s = {bw(gen), std::pow(10.0, logc(gen)), q(gen)};
        const double target = q(gen);
        double prev = std::numeric_limits<double>::infinity();
        for (double e = 8.0; e <= 12.0; e += 0.25) {
            const double cur = b_star(samples, target, std::pow(10.0, e));
            CHECK(cur <= prev);
            prev = cur;
        }
        const double budget = std::pow(10.0, logc(gen));
        prev = 0.0;
        for (double t = 0.0; t <= 1.0; t += 0.05) {
            const double cur = b_star(samples, t, budget);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("closed-form hit rates", "[tradeoff][hit_rate]") {
    const HitRateModel exp_model = ExponentialSaturation{0.5, 2.0};
    CHECK(hit_rate(exp_model, 0.0) == 0.0);
    CHECK(hit_rate(exp_model, 4.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(hit_rate(exp_model, 4.0) == Approx(0.63212).margin(1e-5));

    const HitRateModel power = PowerLaw{1.0, 1.0};
    CHECK(hit_rate(power, 0.0) == 0.0);
    CHECK(hit_rate(power, 9.0) == Approx(0.9).epsilon(1e-14));

    CHECK(kind_of([&] { hit_rate(exp_model, -1.0); }) == ErrorKind::NegativeCapacity);
    CHECK(kind_of([] { hit_rate(PowerLaw{0.0, 1.0}, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("empirical hit rates interpolate and clamp", "[tradeoff][hit_rate]") {
    const HitRateModel table = Empirical{{{1.0, 0.1}, {3.0, 0.5}, {7.0, 0.6}}};
    CHECK(hit_rate(table, 0.0) == 0.1);
    CHECK(hit_rate(table, 1.0) == 0.1);
    CHECK(hit_rate(table, 2.0) == Approx(0.3));
    CHECK(hit_rate(table, 5.0) == Approx(0.55));
    CHECK(hit_rate(table, 100.0) == 0.6);

    CHECK(kind_of([] { hit_rate(Empirical{{{2.0, 0.1}, {1.0, 0.2}}}, 1.0); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { hit_rate(Empirical{{{1.0, 1.2}}}, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("closed forms are bounded, start at zero and increase", "[tradeoff][hit_rate][property]") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> pos(0.05, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const ExponentialSaturation e{pos(gen), pos(gen)};
        const PowerLaw p{pos(gen), pos(gen)};
        // Grids span ten characteristic capacities; beyond that h rounds to 1.0 in double.
        const std::pair<HitRateModel, double> cases[] = {{e, 10.0 * e.entry_size / e.beta}, {p, 10.0 / p.kappa}};
        for (const auto& [model, span] : cases) {
            CHECK(hit_rate(model, 0.0) == 0.0);
            double prev = 0.0;
            for (int i = 1; i <= 100; ++i) {
                const double h = hit_rate(model, span * i / 100.0);
                CHECK(h > prev);
                CHECK(h <= 1.0);
                prev = h;
            }
        }
    }
}

TEST_CASE("expected compute reproduces the 10 GB cache example", "[tradeoff][economics]") {
    const CacheCostParams cost{50, 1e9, 20, 2.0};
    const HitRateModel fixed = Empirical{{{0.0, 0.6}}};
    const auto e = expected_compute(cost, fixed, 10.0);
    CHECK(e.full_cost == 5e10);
    CHECK(e.saved_per_hit == 2e10);
    CHECK(e.expected_saved == 1.2e10);
    CHECK(e.expected_cost == 3.8e10);
    CHECK(e.entry_count == 5);
    CHECK(e.saved_flops_per_gb == Approx(1.2e9));
    CHECK(2e9 / e.saved_flops_per_gb == Approx(1.6667).epsilon(1e-4));
}

TEST_CASE("expected compute edge cases", "[tradeoff][economics]") {
    const HitRateModel exp_model = ExponentialSaturation{0.5, 2.0};
    const auto empty = expected_compute({50, 1e9, 20, 2.0}, exp_model, 0.0);
    CHECK(empty.expected_cost == 5e10);
    CHECK(empty.saved_flops_per_gb == 0.0);
    CHECK(empty.entry_count == 0);

    const HitRateModel certain = Empirical{{{0.0, 1.0}}};
    CHECK(expected_compute({50, 1e9, 50, 2.0}, certain, 3.0).expected_cost == 0.0);

    CHECK(kind_of([&] { expected_compute({50, 1e9, 51, 2.0}, exp_model, 1.0); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { expected_compute({50, 1e9, 20, 2.0}, exp_model, -1.0); }) == ErrorKind::NegativeCapacity);
}

TEST_CASE("expected compute stays within bounds and never rises with capacity",
          "[tradeoff][economics][property]") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> pos(0.1, 3.0);
    std::uniform_int_distribution<int> steps(1, 100);
    for (int trial = 0; trial < 100; ++trial) {
        const int s = steps(gen);
        const CacheCostParams cost{s, 1e9 * pos(gen), std::uniform_int_distribution<int>(0, s)(gen), pos(gen)};
        const HitRateModel model = trial % 2 ? HitRateModel{PowerLaw{pos(gen), pos(gen)}}
                                             : HitRateModel{ExponentialSaturation{pos(gen), pos(gen)}};
        const double full = cost.total_steps * cost.step_cost;
        const double floor = full - cost.reuse_depth * cost.step_cost;
        double prev = full;
        for (int i = 0; i <= 50; ++i) {
            const double c = expected_compute(cost, model, 0.5 * i).expected_cost;
            CHECK(c <= full);
            CHECK(c >= floor - 1e-6 * full);
            CHECK(c <= prev);
            prev = c;
        }
    }
}

TEST_CASE("marginal benefit", "[tradeoff][marginal]") {
    const CacheCostParams cost{50, 1e9, 20, 2.0};
    const HitRateModel model = ExponentialSaturation{0.5, 2.0};
    const double at_zero = marginal_benefit(cost, model, 0.0);
    CHECK(at_zero == Approx((0.5 / 2.0) * 20 * 1e9).epsilon(1e-15));
    CHECK(marginal_benefit(cost, model, 1000.0 * 2.0 / 0.5) < 1e-6 * at_zero);
    CHECK(marginal_benefit(cost, model, 1.0) > marginal_benefit(cost, model, 2.0));
    CHECK(kind_of([&] { marginal_benefit(cost, Empirical{{{0.0, 0.5}}}, 1.0); }) ==
          ErrorKind::NonDifferentiableModel);
}

TEST_CASE("marginal benefit matches finite differences of expected compute", "[tradeoff][marginal][property]") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int s = 10 + static_cast<int>(u(gen) * 90);
        CacheCostParams cost{s, std::pow(10.0, 8.0 + 2.0 * u(gen)), 1 + static_cast<int>(u(gen) * (s - 1)),
                             0.5 + 3.5 * u(gen)};
        HitRateModel model;
        double capacity = 0.0;
        if (trial % 2 == 0) {
            const double beta = 0.1 + 1.9 * u(gen);
            model = ExponentialSaturation{beta, cost.entry_size};
            capacity = (0.05 + 3.0 * u(gen)) * cost.entry_size / beta;
        } else {
            model = PowerLaw{0.01 + u(gen), 0.2 + 1.8 * u(gen)};
            capacity = 0.1 + 10.0 * u(gen);
        }
        const double step = 1e-4 * cost.entry_size;
        const double fd = (expected_compute(cost, model, capacity - step).expected_cost -
                           expected_compute(cost, model, capacity + step).expected_cost) /
                          (2.0 * step);
        const double analytic = marginal_benefit(cost, model, capacity);
        INFO("trial " << trial << " analytic " << analytic << " fd " << fd);
        CHECK(std::abs(analytic - fd) <= 1e-6 * std::abs(fd));
    }
}

TEST_CASE("exponential fit recovers noiseless parameters", "[tradeoff][fit]") {
    const HitRateModel truth = ExponentialSaturation{0.5, 2.0};
    std::vector<HitRatePoint> pts;
    for (double m : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back({m, hit_rate(truth, m)});
    const auto fit = fit_hit_rate(pts, HitRateFamily::ExponentialSaturation, 2.0);
    const auto& e = std::get<ExponentialSaturation>(fit.model);
    CHECK(std::abs(e.beta - 0.5) <= 0.01 * 0.5);
    CHECK(fit.residual <= 1e-9);
}

TEST_CASE("power-law fit recovers noiseless parameters", "[tradeoff][fit]") {
    const HitRateModel truth = PowerLaw{0.1, 0.8};
    std::vector<HitRatePoint> pts;
    for (double m : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) pts.push_back({m, hit_rate(truth, m)});
    const auto fit = fit_hit_rate(pts, HitRateFamily::PowerLaw, 1.0);
    const auto& p = std::get<PowerLaw>(fit.model);
    CHECK(std::abs(p.kappa - 0.1) <= 0.02 * 0.1);
    CHECK(std::abs(p.gamma - 0.8) <= 0.02 * 0.8);
    CHECK(fit.residual <= 1e-6);
}

TEST_CASE("power-law fit recovers parameters across scales", "[tradeoff][fit][property]") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> loguni(-3.0, 1.0), g(0.3, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const PowerLaw truth{std::pow(10.0, loguni(gen)), g(gen)};
        std::vector<HitRatePoint> pts;
        for (int i = 0; i < 8; ++i) {
            const double m = std::pow(2.0, i) / truth.kappa * 0.1;
            pts.push_back({m, hit_rate(truth, m)});
        }
        const auto fit = fit_hit_rate(pts, HitRateFamily::PowerLaw, 1.0);
        const auto& p = std::get<PowerLaw>(fit.model);
        INFO("kappa " << truth.kappa << " gamma " << truth.gamma);
        CHECK(p.kappa == Approx(truth.kappa).epsilon(0.02));
        CHECK(p.gamma == Approx(truth.gamma).epsilon(0.02));
        CHECK(fit.residual <= 1e-6);
    }
}

TEST_CASE("fit rejects degenerate inputs", "[tradeoff][fit]") {
    const std::vector<HitRatePoint> zeros{{1, 0}, {2, 0}, {3, 0}};
    CHECK(kind_of([&] { fit_hit_rate(zeros, HitRateFamily::ExponentialSaturation, 1.0); }) ==
          ErrorKind::DegeneratePoints);
    CHECK(kind_of([&] { fit_hit_rate(zeros, HitRateFamily::PowerLaw, 1.0); }) == ErrorKind::DegeneratePoints);

    const std::vector<HitRatePoint> saturated{{1, 0.2}, {2, 0.5}, {3, 1.0}};
    CHECK(kind_of([&] { fit_hit_rate(saturated, HitRateFamily::PowerLaw, 1.0); }) == ErrorKind::DegeneratePoints);

    const std::vector<HitRatePoint> two{{1, 0.2}, {2, 0.5}};
    CHECK(kind_of([&] { fit_hit_rate(two, HitRateFamily::PowerLaw, 1.0); }) == ErrorKind::InvalidArgument);

    const std::vector<HitRatePoint> dup{{1, 0.2}, {1, 0.3}, {2, 0.5}};
    CHECK(kind_of([&] { fit_hit_rate(dup, HitRateFamily::ExponentialSaturation, 1.0); }) ==
          ErrorKind::InvalidArgument);
}
