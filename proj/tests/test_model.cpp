#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dsd/errors.hpp"
#include "dsd/integrator.hpp"
#include "dsd/model.hpp"

using namespace dsd;

namespace {

constexpr double kSaddle = 2.8284271247461903;  // sqrt(8)

MarketParams market_reference(double delta, double a) {
    MarketParams m;
    m.delta = delta;
    m.a = a;
    m.P_d = 3.0;
    m.P_s = 3.0;
    return m;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(reference_params(0.1, 2.6).validate());
    auto m = reference_params(0.1, 2.6);
    m.alpha = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = reference_params(-0.1, 0.0);
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = reference_params(0.1, std::nan(""));
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    CHECK(reference_params(0.0, 0.0).integrable());
    CHECK_FALSE(reference_params(0.1, 0.0).integrable());
    CHECK(reference_params(0, 0).forcing_period() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("vector field examples") {
    const auto m0 = reference_params(0.0, 0.0);
    CHECK(vector_field(m0, 0.0, {0, 0}) == State2{0, 0});

    const State2 saddle = vector_field(m0, 1.234, {kSaddle, 0.0});
    CHECK(std::abs(saddle.p) < 1e-5);
    CHECK(std::abs(saddle.q) < 1e-5);

    const State2 forced = vector_field(reference_params(0.1, 2.6), 0.5, {0, 0});
    CHECK(forced.p == 0.0);
    CHECK(forced.q == doctest::Approx(2.6).epsilon(1e-15));

    CHECK_THROWS_AS(vector_field(m0, 0.0, {std::nan(""), 0.0}), std::domain_error);
    CHECK_THROWS_AS(vector_field(m0, 0.0, {0.0, INFINITY}), std::domain_error);
}

TEST_CASE("hamiltonian examples") {
    const auto m = reference_params(0.0, 0.0);
    CHECK(hamiltonian(m, {0, 0}) == 0.0);
    CHECK(hamiltonian(m, {kSaddle, 0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(hamiltonian(m, {0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("fixed points and eigenvalues") {
    const auto r = fixed_points(reference_params(0.0, 0.0), 3.0);
    CHECK(r.equilibrium == State2{0, 0});
    CHECK(r.collectability.p == doctest::Approx(2.82843).epsilon(1e-5));
    CHECK(r.saturation.p == -r.collectability.p);
    CHECK(r.saturation.q == 0.0);
    CHECK(r.collectability.q == 0.0);
    CHECK(r.center_eigenvalues[0].real == 0.0);
    CHECK(r.center_eigenvalues[0].imag == doctest::Approx(1.41421).epsilon(1e-5));
    CHECK(r.center_eigenvalues[1].imag == -r.center_eigenvalues[0].imag);
    CHECK(r.saddle_eigenvalues[0].real == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.saddle_eigenvalues[1].real == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.saddle_eigenvalues[0].imag == 0.0);
    REQUIRE(r.condition_sc2_holds.has_value());
    CHECK(*r.condition_sc2_holds);

    CHECK_FALSE(fixed_points(reference_params(0.0, 0.0)).condition_sc2_holds.has_value());
    // (beta + gamma) / beta = 2 is not below beta1 P_d^2 = 0.25 * 4 = 1.
    CHECK_FALSE(*fixed_points(reference_params(0.0, 0.0), 2.0).condition_sc2_holds);
}

TEST_CASE("fixed points are zeros of the unforced field") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int n = 0; n < 20; ++n) {
        ModelParams m{u(rng), u(rng), u(rng), u(rng), 0.0, 0.0, u(rng)};
        const auto r = fixed_points(m);
        for (const State2& x : {r.equilibrium, r.saturation, r.collectability})
            CHECK(norm(vector_field(m, 0.0, x)) < 1e-12);
    }
}

TEST_CASE("heteroclinic orbit examples") {
    const auto m = reference_params(0.0, 0.0);
    const State2 far = heteroclinic_orbit(m, 0.0, Branch::upper, 40.0);
    CHECK(far.p == doctest::Approx(kSaddle).epsilon(1e-12));
    CHECK(std::abs(far.q) < 1e-12);

    const State2 mid = heteroclinic_orbit(m, 0.0, Branch::upper, 0.0);
    CHECK(mid.p == 0.0);
    CHECK(mid.q == doctest::Approx(2.82843).epsilon(1e-5));

    const State2 low = heteroclinic_orbit(m, 0.0, Branch::lower, 0.0);
    CHECK(low.q == doctest::Approx(-2.82843).epsilon(1e-5));

    const auto spec = HeteroclinicSpec::from(m, 0.3, Branch::lower);
    CHECK(spec.A == doctest::Approx(kSaddle));
    CHECK(spec.Omega == doctest::Approx(1.0));
    CHECK(spec.t0 == 0.3);
    // The orbit is a level set of H at the saddle energy.
    for (double t : {-3.0, -0.5, 0.0, 0.7, 2.0})
        CHECK(hamiltonian(m, heteroclinic_orbit(m, 0.3, Branch::upper, t)) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("heteroclinic orbit solves the unforced system") {
    const auto m = reference_params(0.0, 0.0);
    const double Omega = heteroclinic_rate(m);
    const double h = 1e-5;
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double phase = -10.0 + 20.0 * n / 999.0;
        for (Branch b : {Branch::upper, Branch::lower}) {
            const double t = phase / Omega;
            const State2 fd = (1.0 / (2.0 * h)) *
                              (heteroclinic_orbit(m, 0.0, b, t + h) - heteroclinic_orbit(m, 0.0, b, t - h));
            worst = std::max(worst, norm(fd - vector_field(m, t, heteroclinic_orbit(m, 0.0, b, t))));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("unforced field is the Hamiltonian gradient") {
    const auto m = reference_params(0.0, 0.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int n = 0; n < 100; ++n) {
        const State2 x{u(rng), u(rng)};
        const double h = 1e-6;
        const double dHdp = (hamiltonian(m, {x.p + h, x.q}) - hamiltonian(m, {x.p - h, x.q})) / (2 * h);
        const double dHdq = (hamiltonian(m, {x.p, x.q + h}) - hamiltonian(m, {x.p, x.q - h})) / (2 * h);
        const State2 f = vector_field(m, 0.0, x);
        CHECK(std::abs(f.p - dHdq) <= 1e-6 * std::max(1.0, std::abs(f.p)));
        CHECK(std::abs(f.q + dHdp) <= 1e-6 * std::max(1.0, std::abs(f.q)));
    }
}

TEST_CASE("field symmetries") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const auto unforced = reference_params(0.1, 0.0);
    const auto forced = reference_params(0.1, 3.5);
    const double half = 0.5 * forced.forcing_period();
    for (int n = 0; n < 100; ++n) {
        const State2 x{u(rng), u(rng)};
        const double t = u(rng);
        const State2 odd = vector_field(unforced, t, -x) + vector_field(unforced, t, x);
        CHECK(norm(odd) < 1e-12);
        const State2 equiv = vector_field(forced, t + half, -x) + vector_field(forced, t, x);
        CHECK(norm(equiv) < 1e-12);
    }
}

TEST_CASE("market vector field examples") {
    auto m = market_reference(0.1, 0.0);
    m.P_s = 4.0;
    m.c = 0.3;
    const MarketState eq{m.P_d, 7.0, 7.0};
    const MarketState r = market_vector_field(m, 0.4, eq);
    CHECK(r.P == 0.0);
    CHECK(r.D == 0.0);
    CHECK(r.S == doctest::Approx(-m.gamma * (m.P_s - m.P_d) + m.c));

    const auto balanced = market_reference(0.1, 0.0);
    CHECK(market_vector_field(balanced, 1.0, {3.0, 5.0, 5.0}) == MarketState{0, 0, 0});

    CHECK_THROWS_AS(market_vector_field(balanced, 0.0, {NAN, 0, 0}), std::domain_error);
}

TEST_CASE("market field reduces to the planar field") {
    const auto market = market_reference(0.1, 2.6);
    const auto planar = reduce_to_planar(market);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int n = 0; n < 100; ++n) {
        const MarketState x{market.P_d + u(rng), 10.0 + u(rng), 10.0 + u(rng)};
        const double t = u(rng);
        const MarketState dx = market_vector_field(market, t, x);
        const State2 f = vector_field(planar, t, to_planar(x, market.P_d));
        CHECK(dx.P == doctest::Approx(f.p).epsilon(1e-12));
        CHECK(std::abs((dx.D - dx.S) - f.q) < 1e-10);
    }
}

TEST_CASE("market params enforce the saturation condition") {
    auto m = market_reference(0.1, 0.0);
    m.P_d = 2.0;  // 0.25 * 4 = 1, not above 1
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.P_d = 2.1;
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("planar reduction") {
    auto m = market_reference(0.1, 2.6);
    const ModelParams r = reduce_to_planar(m);
    CHECK(r == ModelParams{1, 1, 0.25, 1, 0.1, 2.6, std::numbers::pi});

    auto bad = m;
    bad.c = 0.5;
    try {
        reduce_to_planar(bad);
        FAIL("expected reduction_error");
    } catch (const reduction_error& e) {
        CHECK(e.residual() == doctest::Approx(0.5));
    }

    auto shifted = m;
    shifted.P_s = 4.0;
    shifted.c = 1.0;
    CHECK(reduce_to_planar(shifted) == r);

    auto oscillating = m;
    oscillating.b = 0.2;
    CHECK_THROWS_AS(reduce_to_planar(oscillating), reduction_error);
}

TEST_CASE("shifted supply threshold evolves like the planar system") {
    auto m = market_reference(0.1, 2.6);
    m.P_s = 4.0;
    m.c = 1.0;
    const auto planar = reduce_to_planar(m);
    IntegratorOptions o;
    o.step = 0.01;
    const auto full = integrate_market(m, {m.P_d + 0.3, 12.0, 11.5}, 0.0, 10.0, o);
    const auto red = integrate(planar, {0.3, 0.5}, 0.0, 10.0, o);
    CHECK(distance(to_planar(full.final_state, m.P_d), red.final_state) < 1e-9);
}

TEST_CASE("reconstruct market states") {
    const auto m = market_reference(0.0, 0.0);
    Trajectory still;
    for (int n = 0; n <= 10; ++n) still.push_back(0.5 * n, {0.0, 0.0});
    for (const MarketState& x : reconstruct_market(still, m, 10.0)) {
        CHECK(x.P == m.P_d);
        CHECK(x.D == 10.0);
        CHECK(x.S == 10.0);
    }

    const auto forced = market_reference(0.1, 2.6);
    IntegratorOptions o;
    o.step = 1e-3;
    const auto out = integrate(reduce_to_planar(forced), {0.2, -0.4}, 0.0, 5.0, o, RecordPolicy::every_step());
    const auto& traj = *out.trajectory;
    const auto states = reconstruct_market(traj, forced, 20.0);
    REQUIRE(states.size() == traj.size());
    for (std::size_t n = 0; n < states.size(); ++n) {
        CHECK(states[n].D - states[n].S == doctest::Approx(traj.states[n].q).epsilon(1e-12));
        CHECK(states[n].P - forced.P_d == doctest::Approx(traj.states[n].p).epsilon(1e-12));
    }

    // Residual of the full model: central differences of the reconstruction
    // against the market vector field at interior samples.
    double worst = 0.0;
    for (std::size_t n = 1; n + 1 < states.size(); n += 97) {
        const double h = traj.times[n + 1] - traj.times[n - 1];
        const MarketState fd = (1.0 / h) * (states[n + 1] - states[n - 1]);
        const MarketState f = market_vector_field(forced, traj.times[n], states[n]);
        worst = std::max({worst, std::abs(fd.P - f.P), std::abs(fd.D - f.D), std::abs(fd.S - f.S)});
    }
    CHECK(worst < 1e-5);

    auto mismatched = forced;
    mismatched.c = 0.7;
    CHECK_THROWS_AS(reconstruct_market(traj, mismatched, 0.0), reduction_error);
}

TEST_CASE("price validity checks") {
    CHECK(price_nonnegative(MarketState{0.0, 1, 1}));
    CHECK_FALSE(price_nonnegative(MarketState{-0.1, 1, 1}));
    CHECK(price_nonnegative(State2{-2.9, 0}, 3.0));
    CHECK_FALSE(price_nonnegative(State2{-3.1, 0}, 3.0));
}

TEST_CASE("trajectory times must increase") {
    Trajectory t;
    t.push_back(0.0, {});
    CHECK_THROWS_AS(t.push_back(0.0, {}), std::invalid_argument);
}
