#include "dsd/model.hpp"

#include <stdexcept>
#include <string>

#include "dsd/errors.hpp"

namespace dsd {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ModelParams::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(beta1) && beta1 > 0.0, "beta1 must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
    require(std::isfinite(delta) && delta >= 0.0, "delta must be non-negative");
    require(std::isfinite(a), "a must be finite");
    require(std::isfinite(omega1) && omega1 > 0.0, "omega1 must be positive");
}

ModelParams reference_params(double delta, double a) {
    ModelParams m;
    m.delta = delta;
    m.a = a;
    return m;
}

void Trajectory::push_back(double t, const State2& x) {
    if (!times.empty() && !(t > times.back()))
        throw std::invalid_argument("trajectory times must be strictly increasing");
    times.push_back(t);
    states.push_back(x);
}

void MarketParams::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(beta1) && beta1 > 0.0, "beta1 must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
    require(std::isfinite(delta) && delta >= 0.0, "delta must be non-negative");
    require(std::isfinite(P_d) && P_d > 0.0, "P_d must be positive");
    require(std::isfinite(P_s) && P_s > 0.0, "P_s must be positive");
    require(std::isfinite(a) && std::isfinite(c) && std::isfinite(b), "forcing terms must be finite");
    require(std::isfinite(omega1) && omega1 > 0.0, "omega1 must be positive");
    require(std::isfinite(omega2) && omega2 > 0.0, "omega2 must be positive");
    require(1.0 < beta1 * P_d * P_d, "saturation condition 1 < beta1 * P_d^2 violated");
}

double saddle_distance(const ModelParams& params) {
    return std::sqrt((params.beta + params.gamma) / (params.beta * params.beta1));
}

double heteroclinic_rate(const ModelParams& params) {
    return std::sqrt(0.5 * params.alpha * (params.beta + params.gamma));
}

HeteroclinicSpec HeteroclinicSpec::from(const ModelParams& params, double t0, Branch branch) {
    params.validate();
    return {saddle_distance(params), heteroclinic_rate(params), t0, branch};
}

State2 vector_field(const ModelParams& params, double t, const State2& x) {
    if (!x.finite()) throw std::domain_error("vector_field: non-finite state");
    return vector_field_unchecked(params, forcing_at(params, t), x);
}

double hamiltonian(const ModelParams& m, const State2& x) {
    const double p2 = x.p * x.p;
    return 0.5 * m.alpha * x.q * x.q + 0.5 * (m.beta + m.gamma) * p2 - 0.25 * m.beta * m.beta1 * p2 * p2;
}

FixedPointReport fixed_points(const ModelParams& params, std::optional<double> P_d) {
    params.validate();
    const double A = saddle_distance(params);
    const double k = params.alpha * (params.beta + params.gamma);
    const double center = std::sqrt(k);
    const double saddle = std::sqrt(2.0 * k);

    FixedPointReport r;
    r.equilibrium = {0.0, 0.0};
    r.saturation = {-A, 0.0};
    r.collectability = {A, 0.0};
    r.center_eigenvalues[0] = {0.0, center};
    r.center_eigenvalues[1] = {0.0, -center};
    r.saddle_eigenvalues[0] = {saddle, 0.0};
    r.saddle_eigenvalues[1] = {-saddle, 0.0};
    if (P_d)
        r.condition_sc2_holds = (params.beta + params.gamma) / params.beta < params.beta1 * *P_d * *P_d;
    return r;
}

State2 heteroclinic_orbit(const ModelParams& params, double t0, Branch branch, double t) {
    const auto h = HeteroclinicSpec::from(params, t0, branch);
    const double phase = h.Omega * t + h.t0;
    const double sech = 1.0 / std::cosh(phase);
    State2 x{h.A * std::tanh(phase), h.A * h.Omega / params.alpha * sech * sech};
    return branch == Branch::upper ? x : -x;
}

MarketState market_vector_field(const MarketParams& m, double t, const MarketState& x) {
    if (!x.finite()) throw std::domain_error("market_vector_field: non-finite state");
    return market_vector_field_unchecked(m, t, x);
}

double reduction_residual(const MarketParams& m) { return m.c - m.gamma * (m.P_s - m.P_d); }

ModelParams reduce_to_planar(const MarketParams& m) {
    m.validate();
    if (m.b != 0.0)
        throw reduction_error("reduction requires b = 0 (supply oscillation present)", m.b);
    const double residual = reduction_residual(m);
    const double scale = std::max({1.0, std::abs(m.c), std::abs(m.gamma * (m.P_s - m.P_d))});
    if (std::abs(residual) > 1e-12 * scale)
        throw reduction_error("reduction requires c - gamma (P_s - P_d) = 0, residual constant is " +
                                  std::to_string(residual),
                              residual);
    return {m.alpha, m.beta, m.beta1, m.gamma, m.delta, m.a, m.omega1};
}

std::vector<MarketState> reconstruct_market(const Trajectory& traj, const MarketParams& params,
                                            double D0) {
    const ModelParams m = reduce_to_planar(params);
    if (!std::isfinite(D0)) throw std::invalid_argument("reconstruct_market: D0 must be finite");
    if (traj.times.size() != traj.states.size())
        throw std::invalid_argument("reconstruct_market: trajectory length mismatch");

    // dD/dt = beta (P_d - P)[1 - beta1 (P_d - P)^2] + a sin(omega1 t), with P_d - P = -p.
    auto demand_rate = [&m](double t, const State2& x) {
        return -m.beta * x.p * (1.0 - m.beta1 * x.p * x.p) + forcing_at(m, t);
    };

    std::vector<MarketState> out;
    out.reserve(traj.size());
    double D = D0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i > 0) {
            const double h = traj.times[i] - traj.times[i - 1];
            D += 0.5 * h * (demand_rate(traj.times[i - 1], traj.states[i - 1]) +
                            demand_rate(traj.times[i], traj.states[i]));
        }
        const State2& x = traj.states[i];
        out.push_back({x.p + params.P_d, D, D - x.q});
    }
    return out;
}

}  // namespace dsd
