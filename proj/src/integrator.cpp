#include "dsd/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsd {

void IntegratorOptions::validate() const {
    if (method == Method::rk4 && !(std::isfinite(step) && step > 0.0))
        throw std::invalid_argument("rk4 step must be positive");
    if (method == Method::rk45 && !(rel_tol > 0.0 && abs_tol > 0.0))
        throw std::invalid_argument("rk45 tolerances must be positive");
    if (!(escape_radius > 0.0)) throw std::invalid_argument("escape radius must be positive");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
}

IntegratorOptions IntegratorOptions::rk4_per_period(const ModelParams& params, int steps_per_period) {
    if (steps_per_period < 1) throw std::invalid_argument("steps_per_period must be at least 1");
    IntegratorOptions o;
    o.method = Method::rk4;
    o.step = params.forcing_period() / steps_per_period;
    return o;
}

const char* to_string(Status s) {
    switch (s) {
        case Status::completed: return "completed";
        case Status::escaped: return "escaped";
        case Status::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

namespace {

// Stage 0 evaluates at the step start, 1 at the midpoint, 2 at the end.
template <class State, class F>
State rk4_step(F&& f, double h, const State& x) {
    const double half = 0.5 * h;
    const State k1 = f(0, x);
    const State k2 = f(1, x + half * k1);
    const State k3 = f(1, x + half * k2);
    const State k4 = f(2, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Next boundary of the fixed grid t0 + n h, snapped onto `stop` when within a
// sliver of it.
double next_grid_time(double t0, double h, std::size_t n, double stop) {
    const double t = t0 + static_cast<double>(n + 1) * h;
    return t >= stop - 1e-9 * h ? stop : t;
}

double scaled_error_norm(const State2& err, const State2& x, const State2& y, double atol, double rtol) {
    auto c = [&](double e, double u, double v) {
        return std::abs(e) / (atol + rtol * std::max(std::abs(u), std::abs(v)));
    };
    return std::max(c(err.p, x.p, y.p), c(err.q, x.q, y.q));
}

double scaled_error_norm(const MarketState& err, const MarketState& x, const MarketState& y,
                         double atol, double rtol) {
    auto c = [&](double e, double u, double v) {
        return std::abs(e) / (atol + rtol * std::max(std::abs(u), std::abs(v)));
    };
    return std::max({c(err.P, x.P, y.P), c(err.D, x.D, y.D), c(err.S, x.S, y.S)});
}

template <class State>
struct Run {
    Status status = Status::completed;
    double t = 0.0;
    State x{};
    int sign = 0;
    std::vector<double> times;
    std::vector<State> states;
};

// Model-specific hooks: field(t, x), measure(x) for escape, sign_of(x).
template <class State, class Field, class Measure, class SignOf>
Run<State> drive(Field&& field, Measure&& measure, SignOf&& sign_of, const State& x0, double t0,
                 double t1, const IntegratorOptions& opts, const RecordPolicy& record) {
    opts.validate();
    if (!(t1 > t0)) throw std::invalid_argument("integrate requires t1 > t0");
    if (!x0.finite()) throw std::domain_error("integrate: non-finite initial state");
    if (record.kind == RecordPolicy::Kind::every_dt && !(record.dt > 0.0))
        throw std::invalid_argument("sampling interval must be positive");

    Run<State> run;
    run.t = t0;
    run.x = x0;

    const bool every_step = record.kind == RecordPolicy::Kind::every_step;
    const bool every_dt = record.kind == RecordPolicy::Kind::every_dt;
    if (record.kind != RecordPolicy::Kind::none) {
        run.times.push_back(t0);
        run.states.push_back(x0);
    }
    std::size_t sample_index = 1;
    auto next_sample = [&]() {
        const double s = t0 + static_cast<double>(sample_index) * record.dt;
        return s >= t1 - 1e-9 * record.dt ? t1 : s;
    };

    // Returns false when the run must stop.
    auto accept = [&](double t_new, const State& x_new) {
        if (!x_new.finite()) {
            run.status = Status::escaped;
            run.sign = sign_of(run.x) >= 0.0 ? 1 : -1;
            run.t = t_new;
            return false;
        }
        run.t = t_new;
        run.x = x_new;
        bool on_sample = false;
        if (every_dt && t_new == next_sample()) {
            on_sample = true;
            ++sample_index;
        }
        if (every_step || on_sample) {
            run.times.push_back(t_new);
            run.states.push_back(x_new);
        }
        if (measure(x_new) > opts.escape_radius) {
            run.status = Status::escaped;
            run.sign = sign_of(x_new) >= 0.0 ? 1 : -1;
            return false;
        }
        return true;
    };

    std::size_t steps = 0;
    if (opts.method == Method::rk4) {
        std::size_t n = 0;
        double grid_next = next_grid_time(t0, opts.step, n, t1);
        while (run.t < t1) {
            if (steps >= opts.max_steps) {
                run.status = Status::budget_exhausted;
                return run;
            }
            double target = grid_next;
            if (every_dt) target = std::min(target, next_sample());
            const double t = run.t;
            const double h = target - t;
            auto f = [&](int stage, const State& y) {
                return field(stage == 0 ? t : stage == 1 ? t + 0.5 * h : t + h, y);
            };
            const State x_new = rk4_step(f, h, run.x);
            ++steps;
            if (target == grid_next) {
                ++n;
                grid_next = next_grid_time(t0, opts.step, n, t1);
            }
            if (!accept(target, x_new)) return run;
        }
        return run;
    }

    // Dormand-Prince 5(4) with FSAL and standard step-size control.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double h = std::min(opts.step, t1 - t0);
    State k1 = field(run.t, run.x);
    while (run.t < t1) {
        if (steps >= opts.max_steps) {
            run.status = Status::budget_exhausted;
            return run;
        }
        double target = t1;
        if (every_dt) target = std::min(target, next_sample());
        bool lands = false;
        if (run.t + h >= target - 1e-12 * std::abs(target)) {
            h = target - run.t;
            lands = true;
        }
        const double t = run.t;
        const State& x = run.x;
        const State k2 = field(t + c2 * h, x + h * (a21 * k1));
        const State k3 = field(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
        const State k4 = field(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = field(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 =
            field(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        ++steps;
        if (!x_new.finite()) {
            // Treat as escape only when the step cannot be shrunk further.
            if (h > 1e-12 * std::max(1.0, std::abs(t))) {
                h *= 0.2;
                continue;
            }
            accept(t + h, x_new);
            return run;
        }
        const State k7 = field(t + h, x_new);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err_norm = scaled_error_norm(err, x, x_new, opts.abs_tol, opts.rel_tol);
        if (err_norm <= 1.0) {
            const double t_new = lands ? target : t + h;
            k1 = k7;
            if (!accept(t_new, x_new)) return run;
            const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            h *= grow;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        }
    }
    return run;
}

}  // namespace

IntegrationOutcome integrate(const ModelParams& params, const State2& x0, double t0, double t1,
                             const IntegratorOptions& opts, const RecordPolicy& record) {
    params.validate();
    auto field = [&params](double t, const State2& x) {
        return vector_field_unchecked(params, forcing_at(params, t), x);
    };
    auto run = drive(field, [](const State2& x) { return max_abs(x); },
                     [](const State2& x) { return x.p; }, x0, t0, t1, opts, record);

    IntegrationOutcome out;
    out.status = run.status;
    out.final_time = run.t;
    out.final_state = run.x;
    out.escape_sign = run.sign;
    if (record.kind != RecordPolicy::Kind::none)
        out.trajectory = Trajectory{std::move(run.times), std::move(run.states)};
    return out;
}

MarketOutcome integrate_market(const MarketParams& params, const MarketState& x0, double t0,
                               double t1, const IntegratorOptions& opts, const RecordPolicy& record) {
    params.validate();
    auto field = [&params](double t, const MarketState& x) {
        return market_vector_field_unchecked(params, t, x);
    };
    const double P_d = params.P_d;
    auto run = drive(field, [P_d](const MarketState& x) { return max_abs(to_planar(x, P_d)); },
                     [P_d](const MarketState& x) { return x.P - P_d; }, x0, t0, t1, opts, record);

    MarketOutcome out;
    out.status = run.status;
    out.final_time = run.t;
    out.final_state = run.x;
    out.escape_sign = run.sign;
    if (record.kind != RecordPolicy::Kind::none)
        out.trajectory = MarketTrajectory{std::move(run.times), std::move(run.states)};
    return out;
}

Rk4Window::Rk4Window(const ModelParams& params, double t0, double t1, const IntegratorOptions& opts)
    : params_(params), escape_radius_(opts.escape_radius), over_budget_(false) {
    params.validate();
    opts.validate();
    if (opts.method != Method::rk4) throw std::invalid_argument("Rk4Window requires the rk4 method");
    if (!(t1 > t0)) throw std::invalid_argument("Rk4Window requires t1 > t0");
    double t = t0;
    for (std::size_t n = 0; t < t1; ++n) {
        if (steps_.size() >= opts.max_steps) {
            over_budget_ = true;
            break;
        }
        const double next = next_grid_time(t0, opts.step, n, t1);
        const double h = next - t;
        steps_.push_back({h, forcing_at(params, t), forcing_at(params, t + 0.5 * h),
                          forcing_at(params, t + h)});
        t = next;
    }
}

WindowResult Rk4Window::advance(State2 x) const {
    if (!x.finite()) throw std::domain_error("Rk4Window: non-finite initial state");
    for (const Step& s : steps_) {
        auto f = [&](int stage, const State2& y) {
            return vector_field_unchecked(params_, stage == 0 ? s.f_start : stage == 1 ? s.f_mid : s.f_end,
                                          y);
        };
        const State2 next = rk4_step(f, s.h, x);
        if (!next.finite()) return {x, x.p >= 0.0 ? 1 : -1, false};
        x = next;
        if (max_abs(x) > escape_radius_) return {x, x.p >= 0.0 ? 1 : -1, false};
    }
    return {x, 0, over_budget_};
}

}  // namespace dsd
