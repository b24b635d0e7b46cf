// Demand-supply dynamics: parameter/state types, vector fields, Hamiltonian,
// fixed points and the closed-form heteroclinic cycle.
//
// Reduced planar system, with p = P - P_d (price deviation) and q = D - S:
//
//   dp/dt = alpha q
//   dq/dt = -beta p (1 - beta1 p^2) - gamma p - delta q + a sin(omega1 t)
//
// The full model evolves (P, D, S) with an optional constant and oscillating
// supply term; it reduces to the planar system when those terms cancel.

#ifndef DSD_MODEL_HPP
#define DSD_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace dsd {

struct ModelParams {
    double alpha = 1.0;
    double beta = 1.0;
    double beta1 = 0.25;
    double gamma = 1.0;
    double delta = 0.0;
    double a = 0.0;
    double omega1 = std::numbers::pi;

    /// Throws std::invalid_argument unless alpha, beta, beta1, gamma, omega1 > 0,
    /// delta >= 0 and every field is finite.
    void validate() const;

    bool integrable() const { return delta == 0.0 && a == 0.0; }

    double forcing_period() const { return 2.0 * std::numbers::pi / omega1; }

    bool operator==(const ModelParams&) const = default;
};

/// Reference parameters of the numerical experiments with the given damping
/// and forcing amplitude.
ModelParams reference_params(double delta, double a);

struct State2 {
    double p = 0.0;
    double q = 0.0;

    bool finite() const { return std::isfinite(p) && std::isfinite(q); }

    State2& operator+=(const State2& o) { p += o.p; q += o.q; return *this; }
    State2& operator-=(const State2& o) { p -= o.p; q -= o.q; return *this; }
    State2& operator*=(double s) { p *= s; q *= s; return *this; }

    friend State2 operator+(State2 x, const State2& y) { return x += y; }
    friend State2 operator-(State2 x, const State2& y) { return x -= y; }
    friend State2 operator-(const State2& x) { return {-x.p, -x.q}; }
    friend State2 operator*(double s, State2 x) { return x *= s; }
    friend State2 operator*(State2 x, double s) { return x *= s; }

    bool operator==(const State2&) const = default;
};

inline double norm(const State2& x) { return std::hypot(x.p, x.q); }
inline double distance(const State2& x, const State2& y) { return norm(x - y); }
inline double max_abs(const State2& x) { return std::max(std::abs(x.p), std::abs(x.q)); }

/// Time-stamped samples. Times are strictly increasing and both sequences
/// have equal length.
struct Trajectory {
    std::vector<double> times;
    std::vector<State2> states;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    void push_back(double t, const State2& x);
};

struct MarketParams {
    double alpha = 1.0;
    double beta = 1.0;
    double beta1 = 0.25;
    double gamma = 1.0;
    double delta = 0.0;
    double P_d = 3.0;
    double P_s = 3.0;
    double a = 0.0;
    double omega1 = std::numbers::pi;
    double c = 0.0;
    double b = 0.0;
    double omega2 = 1.0;

    /// Also enforces the saturation condition 1 < beta1 * P_d^2.
    void validate() const;
};

struct MarketState {
    double P = 0.0;
    double D = 0.0;
    double S = 0.0;

    bool finite() const { return std::isfinite(P) && std::isfinite(D) && std::isfinite(S); }

    MarketState& operator+=(const MarketState& o) { P += o.P; D += o.D; S += o.S; return *this; }
    MarketState& operator*=(double s) { P *= s; D *= s; S *= s; return *this; }

    friend MarketState operator+(MarketState x, const MarketState& y) { return x += y; }
    friend MarketState operator-(const MarketState& x, const MarketState& y) {
        return {x.P - y.P, x.D - y.D, x.S - y.S};
    }
    friend MarketState operator*(double s, MarketState x) { return x *= s; }
    friend MarketState operator*(MarketState x, double s) { return x *= s; }

    bool operator==(const MarketState&) const = default;
};

/// Reduced coordinates (P - P_d, D - S) of a market state.
inline State2 to_planar(const MarketState& x, double P_d) { return {x.P - P_d, x.D - x.S}; }

/// Physical validity: the average price cannot be negative.
inline bool price_nonnegative(const MarketState& x) { return x.P >= 0.0; }
inline bool price_nonnegative(const State2& x, double P_d) { return x.p + P_d >= 0.0; }

struct Eigenpair {
    double real = 0.0;
    double imag = 0.0;
};

struct FixedPointReport {
    State2 equilibrium;
    State2 saturation;
    State2 collectability;
    Eigenpair center_eigenvalues[2];
    Eigenpair saddle_eigenvalues[2];
    /// Set only when a threshold price P_d was supplied.
    std::optional<bool> condition_sc2_holds;
};

enum class Branch { upper, lower };

/// Shape constants of the heteroclinic cycle joining the two saddles.
struct HeteroclinicSpec {
    double A = 0.0;
    double Omega = 0.0;
    double t0 = 0.0;
    Branch branch = Branch::upper;

    static HeteroclinicSpec from(const ModelParams& params, double t0 = 0.0,
                                 Branch branch = Branch::upper);
};

/// Saddle distance sqrt((beta + gamma) / (beta beta1)).
double saddle_distance(const ModelParams& params);

/// Heteroclinic rate sqrt(alpha (beta + gamma) / 2).
double heteroclinic_rate(const ModelParams& params);

// Hot path: no validation, inline so integrators can fold it.
inline State2 vector_field_unchecked(const ModelParams& m, double forcing, const State2& x) {
    return {m.alpha * x.q,
            -m.beta * x.p * (1.0 - m.beta1 * x.p * x.p) - m.gamma * x.p - m.delta * x.q + forcing};
}

inline double forcing_at(const ModelParams& m, double t) { return m.a * std::sin(m.omega1 * t); }

/// Right-hand side of the reduced system. Throws std::domain_error on a
/// non-finite state.
State2 vector_field(const ModelParams& params, double t, const State2& x);

double hamiltonian(const ModelParams& params, const State2& x);

FixedPointReport fixed_points(const ModelParams& params, std::optional<double> P_d = std::nullopt);

State2 heteroclinic_orbit(const ModelParams& params, double t0, Branch branch, double t);

inline MarketState market_vector_field_unchecked(const MarketParams& m, double t, const MarketState& x) {
    const double gap = x.D - x.S;
    const double below = m.P_d - x.P;
    return {m.alpha * gap,
            m.beta * below * (1.0 - m.beta1 * below * below) + m.a * std::sin(m.omega1 * t),
            -m.gamma * (m.P_s - x.P) + m.delta * gap + m.c + m.b * std::sin(m.omega2 * t)};
}

/// Right-hand side of the full (P, D, S) model. Throws std::domain_error on a
/// non-finite state.
MarketState market_vector_field(const MarketParams& params, double t, const MarketState& x);

/// Residual constant c - gamma (P_s - P_d) that the planar reduction absorbs.
double reduction_residual(const MarketParams& params);

/// Throws dsd::reduction_error unless b == 0 and the residual constant vanishes.
ModelParams reduce_to_planar(const MarketParams& params);

/// Recovers (P, D, S) along a reduced trajectory. D is obtained by trapezoid
/// quadrature of the demand equation starting from D0; S = D - q.
std::vector<MarketState> reconstruct_market(const Trajectory& traj, const MarketParams& params,
                                            double D0);

}  // namespace dsd

#endif  // DSD_MODEL_HPP
