// Time stepping for the reduced and full models: fixed-step RK4 and adaptive
// Dormand-Prince RK4(5), with escape detection and optional sampling.

#ifndef DSD_INTEGRATOR_HPP
#define DSD_INTEGRATOR_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "dsd/model.hpp"

namespace dsd {

enum class Method { rk4, rk45 };

struct IntegratorOptions {
    Method method = Method::rk4;
    double step = 0.01;  // fixed step (rk4) or initial trial step (rk45)
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double escape_radius = 50.0;
    std::size_t max_steps = 100'000'000;

    void validate() const;

    /// RK4 with h = T / steps_per_period for the forcing period T of `params`.
    static IntegratorOptions rk4_per_period(const ModelParams& params, int steps_per_period = 200);
};

enum class Status { completed, escaped, budget_exhausted };

const char* to_string(Status s);

struct RecordPolicy {
    enum class Kind { none, every_step, every_dt };
    Kind kind = Kind::none;
    double dt = 0.0;

    static RecordPolicy none() { return {}; }
    static RecordPolicy every_step() { return {Kind::every_step, 0.0}; }
    /// Samples at t0 + k dt; steps are shortened to land on each sample time.
    static RecordPolicy every(double dt) { return {Kind::every_dt, dt}; }
};

struct IntegrationOutcome {
    Status status = Status::completed;
    double final_time = 0.0;
    State2 final_state;
    /// +1 or -1 when escaped, 0 otherwise.
    int escape_sign = 0;
    std::optional<Trajectory> trajectory;
};

struct MarketTrajectory {
    std::vector<double> times;
    std::vector<MarketState> states;
};

struct MarketOutcome {
    Status status = Status::completed;
    double final_time = 0.0;
    MarketState final_state;
    int escape_sign = 0;
    std::optional<MarketTrajectory> trajectory;
};

/// Advances the reduced system from t0 to t1. Halts with Status::escaped the
/// first time max(|p|, |q|) exceeds the escape radius (sign taken from p). A
/// non-finite state produced by a step counts as an escape signed by the last
/// finite p; final_state then holds the last finite state.
IntegrationOutcome integrate(const ModelParams& params, const State2& x0, double t0, double t1,
                             const IntegratorOptions& opts,
                             const RecordPolicy& record = RecordPolicy::none());

/// Full-model analogue of integrate(). Escape is measured on
/// max(|P - P_d|, |D - S|).
MarketOutcome integrate_market(const MarketParams& params, const MarketState& x0, double t0,
                               double t1, const IntegratorOptions& opts,
                               const RecordPolicy& record = RecordPolicy::none());

/// Result of advancing across a precomputed RK4 window.
struct WindowResult {
    State2 state;
    int escape_sign = 0;
    bool budget_exhausted = false;
};

/// Fixed-step RK4 across one time window [t0, t1] with the forcing sampled
/// once at every stage time. Reusable for repeated sweeps of the same window;
/// produces the same bits as integrate() with the same options and no
/// recording.
class Rk4Window {
public:
    Rk4Window(const ModelParams& params, double t0, double t1, const IntegratorOptions& opts);

    WindowResult advance(State2 x) const;

    std::size_t steps() const { return steps_.size(); }

private:
    struct Step {
        double h;
        double f_start;
        double f_mid;
        double f_end;
    };

    ModelParams params_;
    double escape_radius_;
    bool over_budget_;
    std::vector<Step> steps_;
};

}  // namespace dsd

#endif  // DSD_INTEGRATOR_HPP
