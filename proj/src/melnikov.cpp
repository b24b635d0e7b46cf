#include "dsd/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dsd/errors.hpp"

namespace dsd {

namespace {

constexpr double pi = std::numbers::pi;

struct Shape {
    double A;
    double Omega;
    double I;
};

Shape shape_of(const ModelParams& params) {
    params.validate();
    const double A = saddle_distance(params);
    const double Omega = heteroclinic_rate(params);
    return {A, Omega, sech2_cos_integral(params.omega1 / Omega)};
}

double offset_term(const ModelParams& m, const Shape& s) {
    return -4.0 * m.delta * s.A * s.A * s.Omega / (3.0 * m.alpha);
}

}  // namespace

double sech2_cos_integral(double b) {
    if (!(b >= 0.0)) throw std::domain_error("sech2_cos_integral: frequency ratio must be non-negative");
    const double x = 0.5 * pi * b;
    // x / sinh(x) = 1 - x^2/6 + 7 x^4/360 near zero.
    if (x < 1e-4) return 1.0 - x * x / 6.0 + 7.0 * x * x * x * x / 360.0;
    if (x > 700.0) return 2.0 * x * std::exp(-x);
    return x / std::sinh(x);
}

double melnikov_value(const ModelParams& params, double t0) {
    const Shape s = shape_of(params);
    return offset_term(params, s) -
           2.0 * params.a * s.A * s.I * std::sin(params.omega1 / s.Omega * t0);
}

double melnikov_derivative(const ModelParams& params, double t0) {
    const Shape s = shape_of(params);
    const double k = params.omega1 / s.Omega;
    return -2.0 * params.a * s.A * s.I * k * std::cos(k * t0);
}

double critical_amplitude(const ModelParams& params) {
    const Shape s = shape_of(params);
    return 2.0 * params.delta * s.A * s.Omega / (3.0 * params.alpha * s.I);
}

std::vector<double> melnikov_roots(const ModelParams& params, int n_periods) {
    if (n_periods < 1) throw std::invalid_argument("melnikov_roots: n_periods must be at least 1");
    const double threshold = critical_amplitude(params);
    if (!(std::abs(params.a) > threshold))
        throw no_roots_error("forcing amplitude does not exceed the Melnikov threshold; no simple roots");

    const Shape s = shape_of(params);
    const double r = -2.0 * params.delta * s.A * s.Omega / (3.0 * params.alpha * params.a * s.I);
    const double base = std::asin(r);
    const double scale = s.Omega / params.omega1;

    std::vector<double> roots;
    for (int k = -1; k <= n_periods; ++k) {
        for (double theta : {base + 2.0 * pi * k, pi - base + 2.0 * pi * k}) {
            const double t0 = scale * theta;
            if (t0 >= 0.0) roots.push_back(t0);
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.resize(std::min<std::size_t>(roots.size(), 2 * static_cast<std::size_t>(n_periods)));
    return roots;
}

MelnikovReport melnikov_report(const ModelParams& params) {
    const Shape s = shape_of(params);
    MelnikovReport r;
    r.integral_I = s.I;
    r.offset_term = offset_term(params, s);
    r.amplitude_term = 2.0 * params.a * s.A * s.I;
    r.threshold_a = critical_amplitude(params);
    r.has_simple_roots = std::abs(params.a) > r.threshold_a;
    if (params.a != 0.0)
        r.root_ratio = -2.0 * params.delta * s.A * s.Omega / (3.0 * params.alpha * params.a * s.I);
    if (r.has_simple_roots) r.principal_roots = melnikov_roots(params, 1);
    return r;
}

double quadrature_oracle(const ModelParams& params, double t0) {
    params.validate();
    const double A = saddle_distance(params);
    const double Omega = heteroclinic_rate(params);
    auto integrand = [&](double t) {
        const double sech = 1.0 / std::cosh(Omega * t + t0);
        const double q = A * Omega / params.alpha * sech * sech;
        return params.alpha * (-params.delta * q * q + params.a * q * std::sin(params.omega1 * t));
    };

    using boost::math::quadrature::gauss_kronrod;
    // Unit-width panels keep the oscillating factor well resolved.
    const double half_width = 40.0 / Omega;
    const int panels = static_cast<int>(std::ceil(2.0 * half_width));
    const double width = 2.0 * half_width / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = -half_width + i * width;
        total += gauss_kronrod<double, 31>::integrate(integrand, lo, lo + width, 15, 1e-14);
    }
    return total;
}

}  // namespace dsd
