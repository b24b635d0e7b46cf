// Stroboscopic period map of the forced reduced system and attractor
// classification of initial conditions on the section.

#ifndef DSD_POINCARE_HPP
#define DSD_POINCARE_HPP

#include <optional>
#include <string>
#include <vector>

#include "dsd/integrator.hpp"
#include "dsd/model.hpp"

namespace dsd {

struct PoincareOptions {
    /// Section time offset in [0, T).
    double phase = 0.0;
    int transient = 200;
    int max_iterations = 1000;
    int period_max = 8;
    /// Euclidean distance on (p, q) that closes a cycle.
    double match_tol = 1e-6;
    int confirm_count = 5;
    IntegratorOptions integrator;

    void validate(const ModelParams& params) const;

    /// RK4 with h = T/200 and the settling budget appropriate for the damping:
    /// 200/1000 transient/max iterations, raised to 1000/4000 when delta <= 0.02.
    static PoincareOptions defaults_for(const ModelParams& params);
};

/// One application of the period map. escape_sign is +1/-1 when the orbit
/// left the escape radius during the period, in which case `state` is the
/// first state outside it.
struct MapResult {
    State2 state;
    int escape_sign = 0;

    bool escaped() const { return escape_sign != 0; }
};

/// Period map bound to fixed parameters and options. With RK4 the forcing is
/// tabulated once and every application replays the same step schedule.
class PeriodMap {
public:
    PeriodMap(const ModelParams& params, const PoincareOptions& opts);

    MapResult operator()(const State2& x) const;

    const ModelParams& params() const { return params_; }
    double period() const { return period_; }

private:
    ModelParams params_;
    IntegratorOptions integrator_;
    double phase_;
    double period_;
    std::optional<Rk4Window> window_;
};

MapResult poincare_map(const ModelParams& params, const State2& x, const PoincareOptions& opts);

/// x0, F(x0), ..., F^n(x0), truncated at the first escape.
struct SectionOrbit {
    std::vector<State2> states;
    int escape_sign = 0;

    bool escaped() const { return escape_sign != 0; }
};

SectionOrbit iterate_map(const ModelParams& params, const State2& x0, int n, const PoincareOptions& opts);

enum class AttractorKind { periodic, escape_positive, escape_negative, undecided };

const char* to_string(AttractorKind k);

struct AttractorClass {
    AttractorKind kind = AttractorKind::undecided;
    int period = 0;
    /// Section points of the cycle in map order (periodic only).
    std::vector<State2> cycle;
    int iterations_used = 0;
};

/// Iterates the map up to max_iterations and reports the smallest period
/// k <= period_max for which |x_n - x_{n-k}| < match_tol holds for
/// confirm_count consecutive post-transient n; escapes short-circuit. Cycle
/// points must be pairwise farther apart than 1000 * match_tol, otherwise
/// iteration continues.
AttractorClass classify(const ModelParams& params, const State2& x0, const PoincareOptions& opts);

/// Same as above with a prebuilt map.
AttractorClass classify(const PeriodMap& map, const State2& x0, const PoincareOptions& opts);

struct RefinedCycle {
    State2 point;
    double residual = 0.0;
    int newton_steps = 0;
};

/// Solves F^k(x) = x by damped Newton with a central finite-difference
/// Jacobian (relative step 1e-6). Throws dsd::refinement_error when the
/// residual does not drop below 1e-10 within 50 steps.
RefinedCycle refine_cycle(const ModelParams& params, const State2& guess, int k,
                          const PoincareOptions& opts);

}  // namespace dsd

#endif  // DSD_POINCARE_HPP
