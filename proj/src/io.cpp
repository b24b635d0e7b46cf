#include "dsd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <type_traits>

namespace dsd::io {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

KeyValues params_key_values(const ModelParams& m) {
    return {{"alpha", format_number(m.alpha)}, {"beta", format_number(m.beta)},
            {"beta1", format_number(m.beta1)}, {"gamma", format_number(m.gamma)},
            {"delta", format_number(m.delta)}, {"a", format_number(m.a)},
            {"omega1", format_number(m.omega1)}};
}

KeyValues melnikov_key_values(const MelnikovReport& r, bool include_roots) {
    KeyValues kv{{"threshold_a", format_number(r.threshold_a)},
                 {"integral_I", format_number(r.integral_I)},
                 {"offset_term", format_number(r.offset_term)}};
    if (include_roots) {
        kv.emplace_back("amplitude_term", format_number(r.amplitude_term));
        if (r.root_ratio) kv.emplace_back("root_ratio", format_number(*r.root_ratio));
        kv.emplace_back("has_simple_roots", r.has_simple_roots ? "true" : "false");
        std::string roots;
        for (std::size_t i = 0; i < r.principal_roots.size(); ++i) {
            if (i) roots += ',';
            roots += format_number(r.principal_roots[i]);
        }
        kv.emplace_back("principal_roots", roots);
    }
    return kv;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const IntegrationOutcome& outcome) {
    os << "t,p,q\n";
    for (std::size_t n = 0; n < traj.size(); ++n)
        os << format_number(traj.times[n]) << ',' << format_number(traj.states[n].p) << ','
           << format_number(traj.states[n].q) << '\n';
    if (outcome.status == Status::escaped)
        os << "# escaped sign=" << (outcome.escape_sign > 0 ? "+1" : "-1")
           << " t=" << format_number(outcome.final_time) << '\n';
}

void write_cycle_csv(std::ostream& os, const AttractorClass& c) {
    os << "k,index,p,q\n";
    for (std::size_t n = 0; n < c.cycle.size(); ++n)
        os << c.period << ',' << n << ',' << format_number(c.cycle[n].p) << ','
           << format_number(c.cycle[n].q) << '\n';
}

void write_basin_csv(std::ostream& os, const BasinMap& map) {
    os << "i,j,p0,q0,class,period\n";
    for (int j = 0; j < map.grid.ny; ++j) {
        for (int i = 0; i < map.grid.nx; ++i) {
            const State2 x = map.grid.center(i, j);
            const std::size_t n = map.index(i, j);
            os << i << ',' << j << ',' << format_number(x.p) << ',' << format_number(x.q) << ','
               << static_cast<int>(map.classes[n]) << ',' << map.periods[n] << '\n';
        }
    }
}

namespace {

template <class T>
T parse_field(const std::string& s, std::size_t line) {
    T v{};
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is missing in older libstdc++ releases.
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw io_error("basin csv line " + std::to_string(line) + ": bad number '" + s + "'");
    } else {
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw io_error("basin csv line " + std::to_string(line) + ": bad integer '" + s + "'");
    }
    return v;
}

struct Row {
    int i, j;
    double p0, q0;
    int cls, period;
};

}  // namespace

BasinMap read_basin_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("basin csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "i,j,p0,q0,class,period") throw io_error("basin csv has an unexpected header: " + line);

    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 6) throw io_error("basin csv line " + std::to_string(line_no) + ": expected 6 fields");
        rows.push_back({parse_field<int>(f[0], line_no), parse_field<int>(f[1], line_no),
                        parse_field<double>(f[2], line_no), parse_field<double>(f[3], line_no),
                        parse_field<int>(f[4], line_no), parse_field<int>(f[5], line_no)});
    }
    if (rows.empty()) throw io_error("basin csv has no data rows");

    int nx = 0, ny = 0;
    for (const Row& r : rows) {
        nx = std::max(nx, r.i + 1);
        ny = std::max(ny, r.j + 1);
    }
    if (nx < 2 || ny < 2 || rows.size() != static_cast<std::size_t>(nx) * ny)
        throw io_error("basin csv does not describe a complete grid");

    BasinMap map;
    map.grid.nx = nx;
    map.grid.ny = ny;
    map.classes.assign(rows.size(), 0);
    map.periods.assign(rows.size(), 0);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        const Row& r = rows[n];
        if (r.i < 0 || r.j < 0 || static_cast<std::size_t>(r.j) * nx + r.i != n)
            throw io_error("basin csv rows are not in row-major order (j outer, i inner)");
        if (r.cls < 0 || r.cls > 3) throw io_error("basin csv holds an unknown class code");
        map.classes[n] = static_cast<std::uint8_t>(r.cls);
        map.periods[n] = r.period;
    }

    const double dp = (rows[static_cast<std::size_t>(nx) - 1].p0 - rows[0].p0) / (nx - 1);
    const double dq = (rows[static_cast<std::size_t>(ny - 1) * nx].q0 - rows[0].q0) / (ny - 1);
    map.grid.p_min = rows[0].p0 - 0.5 * dp;
    map.grid.p_max = map.grid.p_min + nx * dp;
    map.grid.q_min = rows[0].q0 - 0.5 * dq;
    map.grid.q_max = map.grid.q_min + ny * dq;
    try {
        map.validate();
    } catch (const std::invalid_argument& e) {
        throw io_error(std::string("basin csv is inconsistent: ") + e.what());
    }
    return map;
}

Rgb basin_color(std::uint8_t class_code, int period) {
    switch (static_cast<BasinClass>(class_code)) {
        case BasinClass::periodic:
            if (period == 1) return {255, 255, 255};
            if (period == 3) return {0, 160, 0};
            return {230, 200, 0};
        case BasinClass::escape_positive: return {200, 0, 0};
        case BasinClass::escape_negative: return {0, 0, 200};
        case BasinClass::undecided: break;
    }
    return {0, 0, 0};
}

void write_basin_ppm(std::ostream& os, const BasinMap& map) {
    os << "P6\n" << map.grid.nx << ' ' << map.grid.ny << "\n255\n";
    for (int j = map.grid.ny - 1; j >= 0; --j) {
        for (int i = 0; i < map.grid.nx; ++i) {
            const std::size_t n = map.index(i, j);
            const Rgb c = basin_color(map.classes[n], map.periods[n]);
            os.write(reinterpret_cast<const char*>(c.data()), 3);
        }
    }
}

}  // namespace dsd::io
