#include "dsd/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dsd/errors.hpp"

namespace dsd {

namespace {

constexpr double kCycleSeparationFactor = 1e3;

}  // namespace

void PoincareOptions::validate(const ModelParams& params) const {
    const double T = params.forcing_period();
    if (!(phase >= 0.0 && phase < T)) throw std::invalid_argument("section phase must lie in [0, T)");
    if (transient < 0) throw std::invalid_argument("transient must be non-negative");
    if (!(transient < max_iterations)) throw std::invalid_argument("transient must be below max_iterations");
    if (period_max < 1) throw std::invalid_argument("period_max must be at least 1");
    if (!(match_tol > 0.0)) throw std::invalid_argument("match_tol must be positive");
    if (confirm_count < 1) throw std::invalid_argument("confirm_count must be at least 1");
    integrator.validate();
}

PoincareOptions PoincareOptions::defaults_for(const ModelParams& params) {
    params.validate();
    PoincareOptions o;
    o.integrator = IntegratorOptions::rk4_per_period(params, 200);
    if (params.delta <= 0.02) {
        o.transient = 1000;
        o.max_iterations = 4000;
    }
    return o;
}

PeriodMap::PeriodMap(const ModelParams& params, const PoincareOptions& opts)
    : params_(params), integrator_(opts.integrator), phase_(opts.phase), period_(params.forcing_period()) {
    params.validate();
    opts.validate(params);
    if (integrator_.method == Method::rk4) window_.emplace(params, phase_, phase_ + period_, integrator_);
}

MapResult PeriodMap::operator()(const State2& x) const {
    if (window_) {
        const WindowResult r = window_->advance(x);
        if (r.budget_exhausted) throw std::runtime_error("period map: integrator step budget exhausted");
        return {r.state, r.escape_sign};
    }
    const IntegrationOutcome r = integrate(params_, x, phase_, phase_ + period_, integrator_);
    if (r.status == Status::budget_exhausted)
        throw std::runtime_error("period map: integrator step budget exhausted");
    return {r.final_state, r.escape_sign};
}

MapResult poincare_map(const ModelParams& params, const State2& x, const PoincareOptions& opts) {
    return PeriodMap(params, opts)(x);
}

SectionOrbit iterate_map(const ModelParams& params, const State2& x0, int n, const PoincareOptions& opts) {
    if (n < 1) throw std::invalid_argument("iterate_map: n must be at least 1");
    const PeriodMap map(params, opts);
    SectionOrbit orbit;
    orbit.states.reserve(static_cast<std::size_t>(n) + 1);
    orbit.states.push_back(x0);
    for (int i = 0; i < n; ++i) {
        const MapResult r = map(orbit.states.back());
        orbit.states.push_back(r.state);
        if (r.escaped()) {
            orbit.escape_sign = r.escape_sign;
            break;
        }
    }
    return orbit;
}

const char* to_string(AttractorKind k) {
    switch (k) {
        case AttractorKind::periodic: return "periodic";
        case AttractorKind::escape_positive: return "escape_positive";
        case AttractorKind::escape_negative: return "escape_negative";
        case AttractorKind::undecided: return "undecided";
    }
    return "unknown";
}

AttractorClass classify(const ModelParams& params, const State2& x0, const PoincareOptions& opts) {
    return classify(PeriodMap(params, opts), x0, opts);
}

AttractorClass classify(const PeriodMap& map, const State2& x0, const PoincareOptions& opts) {
    opts.validate(map.params());
    const int kmax = opts.period_max;
    const std::size_t ring = static_cast<std::size_t>(kmax) + 1;
    // history[n % ring] holds x_n for the last kmax + 1 iterates.
    std::vector<State2> history(ring);
    std::vector<int> streak(ring, 0);
    history[0] = x0;

    AttractorClass out;
    State2 x = x0;
    for (int n = 1; n <= opts.max_iterations; ++n) {
        const MapResult r = map(x);
        if (r.escaped()) {
            out.kind = r.escape_sign > 0 ? AttractorKind::escape_positive : AttractorKind::escape_negative;
            out.iterations_used = n;
            return out;
        }
        x = r.state;
        history[static_cast<std::size_t>(n) % ring] = x;
        if (n <= opts.transient) continue;

        for (int k = 1; k <= kmax; ++k) {
            if (n - k < opts.transient) {
                streak[k] = 0;
                continue;
            }
            const State2& back = history[static_cast<std::size_t>(n - k) % ring];
            streak[k] = distance(x, back) < opts.match_tol ? streak[k] + 1 : 0;
        }
        for (int k = 1; k <= kmax; ++k) {
            if (streak[k] < opts.confirm_count) continue;
            std::vector<State2> cycle;
            cycle.reserve(static_cast<std::size_t>(k));
            for (int j = k - 1; j >= 0; --j) cycle.push_back(history[static_cast<std::size_t>(n - j) % ring]);
            // A flip-type approach to a shorter cycle alternates between points
            // barely more than match_tol apart; demand a clear separation.
            const double separation = kCycleSeparationFactor * opts.match_tol;
            bool distinct = true;
            for (int i = 0; i < k && distinct; ++i)
                for (int j = i + 1; j < k && distinct; ++j)
                    distinct = distance(cycle[i], cycle[j]) > separation;
            if (!distinct) continue;
            out.kind = AttractorKind::periodic;
            out.period = k;
            out.cycle = std::move(cycle);
            out.iterations_used = n;
            return out;
        }
    }
    out.iterations_used = opts.max_iterations;
    return out;
}

namespace {

State2 iterate_k(const PeriodMap& map, State2 x, int k) {
    for (int i = 0; i < k; ++i) {
        const MapResult r = map(x);
        if (r.escaped())
            throw refinement_error("orbit escaped while evaluating the iterated map",
                                   std::numeric_limits<double>::infinity());
        x = r.state;
    }
    return x;
}

}  // namespace

RefinedCycle refine_cycle(const ModelParams& params, const State2& guess, int k, const PoincareOptions& opts) {
    if (k < 1) throw std::invalid_argument("refine_cycle: period must be at least 1");
    constexpr double target = 1e-10;
    constexpr int max_newton = 50;
    const PeriodMap map(params, opts);

    auto residual_of = [&](const State2& x) { return iterate_k(map, x, k) - x; };

    State2 x = guess;
    State2 g = residual_of(x);
    double res = norm(g);
    for (int step = 0; step < max_newton; ++step) {
        if (res < target) return {x, res, step};

        // Central differences of G(x) = F^k(x) - x.
        const double hp = 1e-6 * std::max(1.0, std::abs(x.p));
        const double hq = 1e-6 * std::max(1.0, std::abs(x.q));
        const State2 dp = (1.0 / (2.0 * hp)) * (residual_of({x.p + hp, x.q}) - residual_of({x.p - hp, x.q}));
        const State2 dq = (1.0 / (2.0 * hq)) * (residual_of({x.p, x.q + hq}) - residual_of({x.p, x.q - hq}));
        const double det = dp.p * dq.q - dq.p * dp.q;
        if (!(std::abs(det) > 0.0) || !std::isfinite(det))
            throw refinement_error("singular Jacobian of the iterated map", res);
        const State2 delta{(dq.q * g.p - dq.p * g.q) / det, (-dp.q * g.p + dp.p * g.q) / det};

        // Backtrack until the residual decreases.
        double lambda = 1.0;
        bool improved = false;
        for (int half = 0; half < 30; ++half, lambda *= 0.5) {
            const State2 trial = x - lambda * delta;
            try {
                const State2 g_trial = residual_of(trial);
                const double r_trial = norm(g_trial);
                if (r_trial < res) {
                    x = trial;
                    g = g_trial;
                    res = r_trial;
                    improved = true;
                    break;
                }
            } catch (const refinement_error&) {
                // escaped: shrink the step
            }
        }
        if (!improved) break;
    }
    if (res < target) return {x, res, max_newton};
    throw refinement_error("Newton refinement did not converge; last residual " + std::to_string(res), res);
}

}  // namespace dsd
