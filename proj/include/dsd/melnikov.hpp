// Melnikov function along the upper heteroclinic orbit of the reduced system.
//
// With A the saddle distance, Omega the heteroclinic rate and
// I(b) = int_0^inf sech^2(tau) cos(b tau) dtau, the perturbation integral is
//
//   M(t0) = -4 delta A^2 Omega / (3 alpha) - 2 a A I(omega1 / Omega) sin(omega1 t0 / Omega)
//
// and has simple zeros iff |a| exceeds 2 delta A Omega / (3 alpha I).

#ifndef DSD_MELNIKOV_HPP
#define DSD_MELNIKOV_HPP

#include <optional>
#include <vector>

#include "dsd/model.hpp"

namespace dsd {

struct MelnikovReport {
    double integral_I = 0.0;
    double offset_term = 0.0;
    double amplitude_term = 0.0;
    double threshold_a = 0.0;
    bool has_simple_roots = false;
    /// Unset when a == 0.
    std::optional<double> root_ratio;
    /// The two roots in the first period of sin(omega1 t0 / Omega), ascending;
    /// empty without simple roots.
    std::vector<double> principal_roots;
};

/// (pi b / 2) / sinh(pi b / 2); 1 at b = 0. Throws std::domain_error for b < 0.
double sech2_cos_integral(double b);

double melnikov_value(const ModelParams& params, double t0);

/// dM/dt0.
double melnikov_derivative(const ModelParams& params, double t0);

/// Forcing amplitude above which M has simple zeros; 0 when delta == 0.
double critical_amplitude(const ModelParams& params);

/// All zeros in the first n_periods periods of M, starting at the smallest
/// non-negative one, sorted ascending. Throws dsd::no_roots_error when
/// |a| <= critical_amplitude.
std::vector<double> melnikov_roots(const ModelParams& params, int n_periods);

MelnikovReport melnikov_report(const ModelParams& params);

/// M(t0) by adaptive Gauss-Kronrod quadrature of
/// alpha * (-delta q^2 + a q sin(omega1 t)) along the closed-form orbit,
/// truncated to |Omega t| <= 40.
double quadrature_oracle(const ModelParams& params, double t0);

}  // namespace dsd

#endif  // DSD_MELNIKOV_HPP
