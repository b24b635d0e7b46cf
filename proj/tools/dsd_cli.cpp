// dsd_cli: simulate, melnikov, classify, basin and fractal subcommands for
// the forced demand-supply model.
//
// Exit codes: 0 success, 2 usage, 3 I/O, 4 degenerate input.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsd/basin.hpp"
#include "dsd/errors.hpp"
#include "dsd/integrator.hpp"
#include "dsd/io.hpp"
#include "dsd/melnikov.hpp"
#include "dsd/model.hpp"
#include "dsd/poincare.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_omega(const std::string& s) {
    if (s == "pi") return std::numbers::pi;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || used == 0) throw UsageError("--omega1 expects a number or 'pi', got '" + s + "'");
    return v;
}

struct ModelFlags {
    double alpha = 1.0;
    double beta = 1.0;
    double beta1 = 0.25;
    double gamma = 1.0;
    std::string omega1 = "pi";
    double delta = 0.0;
    double a = 0.0;

    void attach(CLI::App* cmd, bool a_required) {
        cmd->add_option("--alpha", alpha, "price response rate")->capture_default_str();
        cmd->add_option("--beta", beta, "demand response rate")->capture_default_str();
        cmd->add_option("--beta1", beta1, "collectability/saturation coefficient")->capture_default_str();
        cmd->add_option("--gamma", gamma, "supply price response rate")->capture_default_str();
        cmd->add_option("--omega1", omega1, "forcing angular frequency (number or 'pi')")->capture_default_str();
        cmd->add_option("--delta", delta, "damping (supply gap response)")->required();
        auto* opt = cmd->add_option("--a", a, "forcing amplitude");
        if (a_required) opt->required();
    }

    dsd::ModelParams params() const {
        dsd::ModelParams m{alpha, beta, beta1, gamma, delta, a, parse_omega(omega1)};
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return m;
    }
};

struct SectionFlags {
    std::optional<double> phase;
    std::optional<int> transient;
    std::optional<int> max_iter;
    std::optional<int> kmax;
    std::optional<double> eps;
    std::optional<int> confirm;
    int steps_per_period = 200;
    double escape_radius = 50.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--phase", phase, "section time offset in [0, T)");
        cmd->add_option("--transient", transient, "discarded map iterations");
        cmd->add_option("--max-iter", max_iter, "map iteration budget");
        cmd->add_option("--kmax", kmax, "largest period tested");
        cmd->add_option("--eps", eps, "cycle-closing distance");
        cmd->add_option("--confirm", confirm, "consecutive confirmations");
        cmd->add_option("--steps-per-period", steps_per_period, "RK4 steps per forcing period")->capture_default_str();
        cmd->add_option("--escape-radius", escape_radius, "escape threshold on max(|p|,|q|)")->capture_default_str();
    }

    dsd::PoincareOptions apply(dsd::PoincareOptions o, const dsd::ModelParams& m) const {
        if (steps_per_period < 1) throw UsageError("--steps-per-period must be at least 1");
        o.integrator = dsd::IntegratorOptions::rk4_per_period(m, steps_per_period);
        o.integrator.escape_radius = escape_radius;
        if (phase) o.phase = *phase;
        if (transient) o.transient = *transient;
        if (max_iter) o.max_iterations = *max_iter;
        if (kmax) o.period_max = *kmax;
        if (eps) o.match_tol = *eps;
        if (confirm) o.confirm_count = *confirm;
        try {
            o.validate(m);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return o;
    }
};

template <class T>
std::vector<T> parse_list(const std::string& s, std::size_t n, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + ": bad list element '" + item + "'");
        out.push_back(v);
    }
    if (n != 0 && out.size() != n)
        throw UsageError(std::string(flag) + " expects " + std::to_string(n) + " comma-separated values");
    return out;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw dsd::io::io_error("cannot open '" + path + "' for writing");
    return f;
}

void check_written(std::ostream& os, const std::string& path) {
    os.flush();
    if (!os) throw dsd::io::io_error("failed writing '" + path + "'");
}

void echo_params(std::ostream& os, const dsd::ModelParams& m) {
    dsd::io::write_key_values(os, dsd::io::params_key_values(m));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demand-supply dynamics toolkit: simulation, Melnikov threshold, attractors and basins"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate the reduced system and write a t,p,q CSV");
    ModelFlags sim_model;
    sim_model.attach(sim, true);
    double p0 = 0.0, q0 = 0.0, t_end = 0.0, t_start = 0.0;
    std::optional<double> sample_dt, step;
    std::string method = "rk4", sim_out;
    double rtol = 1e-9, atol = 1e-12, sim_radius = 50.0;
    sim->add_option("--p0", p0, "initial price deviation")->required();
    sim->add_option("--q0", q0, "initial demand-supply gap")->required();
    sim->add_option("--t-end", t_end, "final time")->required();
    sim->add_option("--t0", t_start, "initial time")->capture_default_str();
    sim->add_option("--dt", sample_dt, "sampling interval (default: RK4 step)");
    sim->add_option("--step", step, "RK4 step / RK45 initial step (default T/200)");
    sim->add_option("--method", method, "rk4 or rk45")->check(CLI::IsMember({"rk4", "rk45"}))->capture_default_str();
    sim->add_option("--rtol", rtol, "rk45 relative tolerance")->capture_default_str();
    sim->add_option("--atol", atol, "rk45 absolute tolerance")->capture_default_str();
    sim->add_option("--escape-radius", sim_radius, "escape threshold")->capture_default_str();
    sim->add_option("--out", sim_out, "output CSV path (default stdout)");

    // melnikov
    auto* mel = app.add_subcommand("melnikov", "report the Melnikov threshold and roots");
    ModelFlags mel_model;
    mel_model.attach(mel, false);

    // classify
    auto* cls = app.add_subcommand("classify", "classify an initial condition under the period map");
    ModelFlags cls_model;
    cls_model.attach(cls, true);
    SectionFlags cls_section;
    cls_section.attach(cls);
    double c_p0 = 0.0, c_q0 = 0.0;
    std::string cycle_csv;
    bool refine = false;
    cls->add_option("--p0", c_p0, "initial price deviation")->required();
    cls->add_option("--q0", c_q0, "initial demand-supply gap")->required();
    cls->add_option("--cycle-csv", cycle_csv, "write cycle points as k,index,p,q");
    cls->add_flag("--refine", refine, "Newton-refine the first cycle point");

    // basin
    auto* bas = app.add_subcommand("basin", "sweep a grid of initial conditions");
    ModelFlags bas_model;
    bas_model.attach(bas, true);
    SectionFlags bas_section;
    bas_section.attach(bas);
    std::string window = "-6,6,-6,6", res = "150,150", out_csv, out_ppm;
    unsigned threads = 0;
    bas->add_option("--window", window, "pmin,pmax,qmin,qmax")->capture_default_str();
    bas->add_option("--res", res, "nx,ny")->capture_default_str();
    bas->add_option("--out-csv", out_csv, "basin CSV path");
    bas->add_option("--out-ppm", out_ppm, "basin P6 image path");
    bas->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

    // fractal
    auto* fra = app.add_subcommand("fractal", "box-count the basin boundary of a basin CSV");
    std::string in_csv, scales_arg;
    fra->add_option("--in", in_csv, "basin CSV path")->required();
    fra->add_option("--scales", scales_arg, "comma-separated box scales (default: all admissible)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*sim) {
            const dsd::ModelParams m = sim_model.params();
            dsd::IntegratorOptions opts = dsd::IntegratorOptions::rk4_per_period(m, 200);
            if (step) opts.step = *step;
            opts.method = method == "rk45" ? dsd::Method::rk45 : dsd::Method::rk4;
            opts.rel_tol = rtol;
            opts.abs_tol = atol;
            opts.escape_radius = sim_radius;
            if (!(t_end > t_start)) throw UsageError("--t-end must exceed --t0");
            const double dt = sample_dt.value_or(opts.step);
            if (!(dt > 0.0)) throw UsageError("--dt must be positive");
            try {
                opts.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto outcome =
                dsd::integrate(m, {p0, q0}, t_start, t_end, opts, dsd::RecordPolicy::every(dt));
            if (sim_out.empty()) {
                dsd::io::write_trajectory_csv(std::cout, *outcome.trajectory, outcome);
            } else {
                auto f = open_out(sim_out);
                dsd::io::write_trajectory_csv(f, *outcome.trajectory, outcome);
                check_written(f, sim_out);
                echo_params(std::cout, m);
                std::cout << "status=" << dsd::to_string(outcome.status) << '\n';
            }
            return 0;
        }

        if (*mel) {
            const dsd::ModelParams m = mel_model.params();
            const bool with_a = mel->count("--a") > 0;
            echo_params(std::cout, m);
            dsd::io::write_key_values(std::cout, dsd::io::melnikov_key_values(dsd::melnikov_report(m), with_a));
            return 0;
        }

        if (*cls) {
            const dsd::ModelParams m = cls_model.params();
            const auto opts = cls_section.apply(dsd::PoincareOptions::defaults_for(m), m);
            const auto c = dsd::classify(m, {c_p0, c_q0}, opts);
            echo_params(std::cout, m);
            std::cout << "kind=" << dsd::to_string(c.kind) << " period=" << c.period
                      << " iters=" << c.iterations_used << '\n';
            for (std::size_t n = 0; n < c.cycle.size(); ++n)
                std::cout << "cycle" << n << '=' << dsd::io::format_number(c.cycle[n].p) << ','
                          << dsd::io::format_number(c.cycle[n].q) << '\n';
            if (refine && c.kind == dsd::AttractorKind::periodic) {
                const auto r = dsd::refine_cycle(m, c.cycle.front(), c.period, opts);
                std::cout << "refined=" << dsd::io::format_number(r.point.p) << ','
                          << dsd::io::format_number(r.point.q)
                          << " residual=" << dsd::io::format_number(r.residual) << '\n';
            }
            if (!cycle_csv.empty()) {
                auto f = open_out(cycle_csv);
                dsd::io::write_cycle_csv(f, c);
                check_written(f, cycle_csv);
            }
            return 0;
        }

        if (*bas) {
            const dsd::ModelParams m = bas_model.params();
            const auto opts = bas_section.apply(dsd::basin_defaults(m), m);
            const auto w = parse_list<double>(window, 4, "--window");
            const auto r = parse_list<int>(res, 2, "--res");
            dsd::GridSpec grid{w[0], w[1], w[2], w[3], r[0], r[1]};
            try {
                grid.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            // Open outputs before the sweep so a bad path fails fast.
            std::optional<std::ofstream> csv_file, ppm_file;
            if (!out_csv.empty()) csv_file = open_out(out_csv);
            if (!out_ppm.empty()) ppm_file = open_out(out_ppm, true);

            const auto map = dsd::compute_basin(m, grid, opts, threads);
            if (csv_file) {
                dsd::io::write_basin_csv(*csv_file, map);
                check_written(*csv_file, out_csv);
            }
            if (ppm_file) {
                dsd::io::write_basin_ppm(*ppm_file, map);
                check_written(*ppm_file, out_ppm);
            }
            const auto s = dsd::basin_summary(map);
            echo_params(std::cout, m);
            std::cout << "cells=" << s.total << '\n';
            for (const auto& [c, n] : s.by_class) std::cout << "class_" << c << '=' << n << '\n';
            for (const auto& [k, n] : s.by_period) std::cout << "period_" << k << '=' << n << '\n';
            return 0;
        }

        if (*fra) {
            std::ifstream f(in_csv);
            if (!f) throw dsd::io::io_error("cannot open '" + in_csv + "'");
            const auto map = dsd::io::read_basin_csv(f);
            const auto scales =
                scales_arg.empty() ? dsd::admissible_scales(map.grid) : parse_list<int>(scales_arg, 0, "--scales");
            dsd::BoxCountResult r;
            try {
                r = dsd::box_count_boundary(map, scales);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            std::string sc, cn;
            for (std::size_t n = 0; n < r.scales.size(); ++n) {
                sc += (n ? "," : "") + std::to_string(r.scales[n]);
                cn += (n ? "," : "") + std::to_string(r.counts[n]);
            }
            std::cout << "scales=" << sc << "\ncounts=" << cn << "\ndimension=" << dsd::io::format_number(r.dimension)
                      << "\nr_squared=" << dsd::io::format_number(r.r_squared) << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const dsd::io::io_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const dsd::degenerate_boundary_error& e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
