#include <cmath>
#include <random>

#include "doctest.h"
#include "dsd/integrator.hpp"
#include "dsd/model.hpp"

using namespace dsd;

namespace {

IntegratorOptions rk4(double h) {
    IntegratorOptions o;
    o.step = h;
    return o;
}

// Time reversal of the unforced undamped system: (p, q, t) -> (p, -q, -t).
State2 reflect(const State2& x) { return {x.p, -x.q}; }

}  // namespace

TEST_CASE("option validation") {
    auto o = rk4(0.0);
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = rk4(0.01);
    o.escape_radius = 0.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = rk4(0.01);
    o.max_steps = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = rk4(0.01);
    o.method = Method::rk45;
    o.rel_tol = 0.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);

    const auto m = reference_params(0.1, 1.0);
    CHECK_THROWS_AS(integrate(m, {0, 0}, 1.0, 1.0, rk4(0.01)), std::invalid_argument);
    CHECK_THROWS_AS(integrate(m, {NAN, 0}, 0.0, 1.0, rk4(0.01)), std::domain_error);
    CHECK(IntegratorOptions::rk4_per_period(m).step == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("equilibrium stays put") {
    const auto m = reference_params(0.0, 0.0);
    for (Method method : {Method::rk4, Method::rk45}) {
        auto o = rk4(0.01);
        o.method = method;
        const auto r = integrate(m, {0, 0}, 0.0, 50.0, o);
        CHECK(r.status == Status::completed);
        CHECK(r.final_state == State2{0, 0});
        CHECK(r.final_time == 50.0);
    }
}

TEST_CASE("energy drift of RK4 on the integrable system") {
    const auto m = reference_params(0.0, 0.0);
    const State2 x0{0, 1};
    const auto r = integrate(m, x0, 0.0, 100.0, rk4(1e-3));
    const double h0 = hamiltonian(m, x0);
    CHECK(std::abs(hamiltonian(m, r.final_state) - h0) / std::abs(h0) < 1e-8);
}

TEST_CASE("RK4 is fourth order") {
    const auto m = reference_params(0.0, 0.0);
    const State2 x0{0, 1};
    const State2 ref = integrate(m, x0, 0.0, 10.0, rk4(1e-4)).final_state;
    const double coarse = distance(integrate(m, x0, 0.0, 10.0, rk4(1e-2)).final_state, ref);
    const double fine = distance(integrate(m, x0, 0.0, 10.0, rk4(5e-3)).final_state, ref);
    const double ratio = coarse / fine;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("RK45 respects its tolerance") {
    // Damped, unforced: the flow is contracting, so the global error stays
    // at the scale of the local tolerance.
    const auto m = reference_params(0.1, 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    IntegratorOptions loose;
    loose.method = Method::rk45;
    loose.rel_tol = 1e-8;
    loose.abs_tol = 1e-11;
    IntegratorOptions tight = loose;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-16;
    for (int n = 0; n < 20; ++n) {
        const State2 x0{u(rng), u(rng)};
        const auto a = integrate(m, x0, 0.0, 10.0, loose);
        const auto b = integrate(m, x0, 0.0, 10.0, tight);
        REQUIRE(b.status == Status::completed);
        CHECK(a.final_time == 10.0);
        CHECK(distance(a.final_state, b.final_state) < 10.0 * loose.rel_tol * std::max(1.0, norm(b.final_state)));
    }
}

TEST_CASE("RK45 and RK4 agree on the forced system") {
    const auto m = reference_params(0.1, 2.6);
    IntegratorOptions dp;
    dp.method = Method::rk45;
    dp.rel_tol = 1e-11;
    dp.abs_tol = 1e-13;
    const auto a = integrate(m, {0.3, -0.2}, 0.0, 20.0, dp);
    const auto b = integrate(m, {0.3, -0.2}, 0.0, 20.0, rk4(1e-3));
    CHECK(distance(a.final_state, b.final_state) < 1e-8);
}

TEST_CASE("forward then backward returns to the start") {
    const auto m = reference_params(0.0, 0.0);
    const double h = 1e-2;
    const State2 x0{0.5, 0.7};
    const auto fw = integrate(m, x0, 0.0, 1.0, rk4(h), RecordPolicy::every_step());

    // Per-step error bound: largest step-doubling estimate along the path.
    double local = 0.0;
    for (const State2& x : fw.trajectory->states) {
        const State2 one = integrate(m, x, 0.0, h, rk4(h)).final_state;
        const State2 two = integrate(m, x, 0.0, h, rk4(h / 2)).final_state;
        local = std::max(local, distance(one, two) * 16.0 / 15.0);
    }
    const State2 back = reflect(integrate(m, reflect(fw.final_state), 0.0, 1.0, rk4(h)).final_state);
    CHECK(distance(back, x0) < 10.0 * local);
}

TEST_CASE("half-period shift maps solutions to their negatives") {
    const auto m = reference_params(0.1, 3.5);
    const double T = m.forcing_period();
    const State2 x0{0.4, -1.1};
    const auto o = rk4(T / 200);
    for (int k = 1; k <= 5; ++k) {
        const State2 a = integrate(m, x0, 0.0, k * T, o).final_state;
        const State2 b = integrate(m, -x0, 0.5 * T, 0.5 * T + k * T, o).final_state;
        CHECK(norm(a + b) < 1e-8);
    }
}

TEST_CASE("integration is deterministic") {
    const auto m = reference_params(0.1, 5.0);
    const auto a = integrate(m, {0.1, 0.2}, 0.0, 30.0, rk4(0.01), RecordPolicy::every_step());
    const auto b = integrate(m, {0.1, 0.2}, 0.0, 30.0, rk4(0.01), RecordPolicy::every_step());
    CHECK(a.final_state == b.final_state);
    CHECK(a.trajectory->states == b.trajectory->states);
    CHECK(a.trajectory->times == b.trajectory->times);
}

TEST_CASE("escapes") {
    const auto m = reference_params(0.1, 5.0);
    auto o = rk4(0.01);
    o.escape_radius = 50.0;
    const auto up = integrate(m, {30, 30}, 0.0, 100.0, o);
    CHECK(up.status == Status::escaped);
    CHECK(up.escape_sign == 1);
    CHECK(max_abs(up.final_state) > 50.0);
    CHECK(up.final_time < 5.0);

    const auto down = integrate(m, {-30, -30}, 0.0, 100.0, o);
    CHECK(down.status == Status::escaped);
    CHECK(down.escape_sign == -1);
}

TEST_CASE("non-finite step counts as escape") {
    const auto m = reference_params(0.0, 0.0);
    auto o = rk4(50.0);
    o.escape_radius = 1e300;
    const auto r = integrate(m, {40.0, 0.0}, 0.0, 1000.0, o);
    CHECK(r.status == Status::escaped);
    CHECK(r.escape_sign == 1);
    CHECK(r.final_state.finite());
}

TEST_CASE("step budget") {
    auto o = rk4(0.01);
    o.max_steps = 10;
    const auto r = integrate(reference_params(0.1, 1.0), {0.1, 0}, 0.0, 1.0, o);
    CHECK(r.status == Status::budget_exhausted);
    CHECK(r.final_time == doctest::Approx(0.1));
}

TEST_CASE("last step lands exactly on the end time") {
    const auto m = reference_params(0.1, 1.0);
    const auto r = integrate(m, {0.1, 0}, 0.0, 1.005, rk4(0.01), RecordPolicy::every_step());
    CHECK(r.final_time == 1.005);
    CHECK(r.trajectory->times.back() == 1.005);
    CHECK(r.trajectory->size() == 102);
}

TEST_CASE("sampling every dt") {
    const auto m = reference_params(0.1, 1.0);
    const auto r = integrate(m, {0.1, 0}, 0.0, 1.0, rk4(0.01), RecordPolicy::every(0.25));
    REQUIRE(r.trajectory);
    const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0};
    REQUIRE(r.trajectory->times.size() == expected.size());
    for (std::size_t n = 0; n < expected.size(); ++n)
        CHECK(r.trajectory->times[n] == doctest::Approx(expected[n]).epsilon(1e-14));

    // Sampling on the step grid does not perturb the solution.
    const auto plain = integrate(m, {0.1, 0}, 0.0, 1.0, rk4(0.01));
    CHECK(distance(plain.final_state, r.final_state) < 1e-14);

    auto o = rk4(0.01);
    o.method = Method::rk45;
    const auto adaptive = integrate(m, {0.1, 0}, 0.0, 1.0, o, RecordPolicy::every(0.1));
    CHECK(adaptive.trajectory->size() == 11);
    CHECK(adaptive.trajectory->times.back() == 1.0);
}

TEST_CASE("period window matches integrate bit for bit") {
    const auto m = reference_params(0.1, 3.5);
    const auto o = IntegratorOptions::rk4_per_period(m);
    const Rk4Window window(m, 0.3, 0.3 + m.forcing_period(), o);
    CHECK(window.steps() == 200);
    const State2 x0{0.7, -1.2};
    const WindowResult w = window.advance(x0);
    const auto r = integrate(m, x0, 0.3, 0.3 + m.forcing_period(), o);
    CHECK(w.escape_sign == 0);
    CHECK(w.state == r.final_state);
}

TEST_CASE("market equilibrium is constant") {
    MarketParams mp;
    mp.delta = 0.1;
    const auto r = integrate_market(mp, {mp.P_d, 10.0, 10.0}, 0.0, 20.0, rk4(0.01));
    CHECK(r.status == Status::completed);
    CHECK(r.final_state == MarketState{mp.P_d, 10.0, 10.0});
}

TEST_CASE("full and reduced runs agree under the change of variables") {
    MarketParams mp;
    mp.delta = 0.1;
    mp.a = 2.6;
    const ModelParams m = reduce_to_planar(mp);
    const MarketState x0{mp.P_d + 0.5, 10.0, 9.8};
    const auto o = rk4(0.01);
    const auto full = integrate_market(mp, x0, 0.0, 50.0, o, RecordPolicy::every(1.0));
    const auto red = integrate(m, to_planar(x0, mp.P_d), 0.0, 50.0, o, RecordPolicy::every(1.0));
    REQUIRE(full.trajectory->times.size() == red.trajectory->times.size());
    for (std::size_t n = 0; n < red.trajectory->size(); ++n) {
        const double t = red.trajectory->times[n];
        const double err = distance(to_planar(full.trajectory->states[n], mp.P_d), red.trajectory->states[n]);
        CHECK(err <= 1e-10 * std::max(1.0, t));
    }
}

TEST_CASE("strong forcing escapes in both formulations") {
    MarketParams mp;
    mp.delta = 0.1;
    mp.a = 5.0;
    const ModelParams m = reduce_to_planar(mp);
    for (const State2 x : {State2{30, 30}, State2{-30, -30}, State2{0, 40}}) {
        const auto red = integrate(m, x, 0.0, 100.0, rk4(0.01));
        const auto full = integrate_market(mp, {mp.P_d + x.p, 10.0 + x.q, 10.0}, 0.0, 100.0, rk4(0.01));
        CHECK(red.status == Status::escaped);
        CHECK(full.status == Status::escaped);
        CHECK(red.escape_sign == full.escape_sign);
    }
}
