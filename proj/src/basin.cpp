#include "dsd/basin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "dsd/errors.hpp"

namespace dsd {

void GridSpec::validate() const {
    if (!(std::isfinite(p_min) && std::isfinite(p_max) && p_min < p_max))
        throw std::invalid_argument("grid requires p_min < p_max");
    if (!(std::isfinite(q_min) && std::isfinite(q_max) && q_min < q_max))
        throw std::invalid_argument("grid requires q_min < q_max");
    if (nx < 2 || ny < 2) throw std::invalid_argument("grid resolution must be at least 2 x 2");
}

State2 GridSpec::center(int i, int j) const {
    return {p_min + (i + 0.5) * (p_max - p_min) / nx, q_min + (j + 0.5) * (q_max - q_min) / ny};
}

BasinClass to_basin_class(AttractorKind k) {
    switch (k) {
        case AttractorKind::periodic: return BasinClass::periodic;
        case AttractorKind::escape_positive: return BasinClass::escape_positive;
        case AttractorKind::escape_negative: return BasinClass::escape_negative;
        case AttractorKind::undecided: return BasinClass::undecided;
    }
    return BasinClass::undecided;
}

void BasinMap::validate() const {
    grid.validate();
    if (classes.size() != grid.cells() || periods.size() != grid.cells())
        throw std::invalid_argument("basin map arrays must hold nx * ny entries");
    for (std::size_t n = 0; n < classes.size(); ++n) {
        if (classes[n] > 3) throw std::invalid_argument("basin map holds an unknown class code");
        const bool periodic = classes[n] == static_cast<std::uint8_t>(BasinClass::periodic);
        if (periodic != (periods[n] != 0))
            throw std::invalid_argument("basin map periods must be nonzero exactly on periodic cells");
    }
}

PoincareOptions basin_defaults(const ModelParams& params) {
    PoincareOptions o = PoincareOptions::defaults_for(params);
    if (params.delta > 0.02) {
        o.transient = 200;
        o.max_iterations = 300;
    }
    return o;
}

BasinMap compute_basin(const ModelParams& params, const GridSpec& grid, const PoincareOptions& opts,
                       unsigned threads) {
    grid.validate();
    const PeriodMap map(params, opts);

    BasinMap out;
    out.grid = grid;
    out.classes.assign(grid.cells(), 0);
    out.periods.assign(grid.cells(), 0);
    out.params_used = params;
    out.opts_used = opts;

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.ny));

    // Rows are handed out through a shared counter; every cell writes only
    // its own slot.
    std::atomic<int> next_row{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        try {
            for (int j = next_row.fetch_add(1); j < grid.ny; j = next_row.fetch_add(1)) {
                for (int i = 0; i < grid.nx; ++i) {
                    const AttractorClass c = classify(map, grid.center(i, j), opts);
                    const std::size_t n = out.index(i, j);
                    out.classes[n] = static_cast<std::uint8_t>(to_basin_class(c.kind));
                    out.periods[n] = c.kind == AttractorKind::periodic ? c.period : 0;
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next_row.store(grid.ny);
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<int> admissible_scales(const GridSpec& grid) {
    std::vector<int> out;
    for (int s : {1, 2, 4, 8, 16})
        if (grid.nx % s == 0 && grid.ny % s == 0) out.push_back(s);
    return out;
}

BoxCountResult box_count_boundary(const BasinMap& map, const std::vector<int>& scales) {
    map.validate();
    const int nx = map.grid.nx;
    const int ny = map.grid.ny;
    if (nx < 64 || ny < 64) throw std::invalid_argument("box counting requires at least 64 x 64 cells");
    if (scales.size() < 2) throw std::invalid_argument("box counting requires at least two scales");
    for (int s : scales) {
        if (s != 1 && s != 2 && s != 4 && s != 8 && s != 16)
            throw std::invalid_argument("box scales must be drawn from {1, 2, 4, 8, 16}");
        if (nx % s != 0 || ny % s != 0)
            throw std::invalid_argument("box scale " + std::to_string(s) + " does not divide the grid");
    }
    if (std::adjacent_find(map.classes.begin(), map.classes.end(), std::not_equal_to<>()) ==
        map.classes.end())
        throw degenerate_boundary_error("basin map holds a single class; no boundary to count");

    std::vector<std::uint8_t> boundary(map.classes.size(), 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const auto c = map.classes[map.index(i, j)];
            const bool edge = (i > 0 && map.classes[map.index(i - 1, j)] != c) ||
                              (i + 1 < nx && map.classes[map.index(i + 1, j)] != c) ||
                              (j > 0 && map.classes[map.index(i, j - 1)] != c) ||
                              (j + 1 < ny && map.classes[map.index(i, j + 1)] != c);
            boundary[map.index(i, j)] = edge ? 1 : 0;
        }
    }

    BoxCountResult r;
    r.scales = scales;
    std::sort(r.scales.begin(), r.scales.end());
    r.scales.erase(std::unique(r.scales.begin(), r.scales.end()), r.scales.end());
    if (r.scales.size() < 2) throw std::invalid_argument("box counting requires at least two distinct scales");

    for (int s : r.scales) {
        const int bx = nx / s;
        const int by = ny / s;
        std::vector<std::uint8_t> hit(static_cast<std::size_t>(bx) * by, 0);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (boundary[map.index(i, j)]) hit[static_cast<std::size_t>(j / s) * bx + i / s] = 1;
        r.counts.push_back(static_cast<long>(std::count(hit.begin(), hit.end(), 1)));
    }

    // Least squares of log N on log(1/s).
    const double n = static_cast<double>(r.scales.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < r.scales.size(); ++k) {
        const double x = -std::log(static_cast<double>(r.scales[k]));
        const double y = std::log(static_cast<double>(r.counts[k]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double cxx = sxx - sx * sx / n;
    const double cxy = sxy - sx * sy / n;
    const double cyy = syy - sy * sy / n;
    r.dimension = cxy / cxx;
    r.r_squared = cyy > 0.0 ? std::min(1.0, (cxy * cxy) / (cxx * cyy)) : 1.0;
    return r;
}

std::size_t BasinSummary::count(BasinClass c) const {
    const auto it = by_class.find(static_cast<int>(c));
    return it == by_class.end() ? 0 : it->second;
}

std::size_t BasinSummary::period_count(int k) const {
    const auto it = by_period.find(k);
    return it == by_period.end() ? 0 : it->second;
}

double BasinSummary::fraction(BasinClass c) const {
    return total == 0 ? 0.0 : static_cast<double>(count(c)) / static_cast<double>(total);
}

BasinSummary basin_summary(const BasinMap& map) {
    BasinSummary s;
    s.total = map.classes.size();
    for (int c = 0; c <= 3; ++c) s.by_class[c] = 0;
    for (std::size_t n = 0; n < map.classes.size(); ++n) {
        ++s.by_class[map.classes[n]];
        if (map.periods[n] != 0) ++s.by_period[map.periods[n]];
    }
    return s;
}

}  // namespace dsd
