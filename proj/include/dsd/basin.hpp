// Basins of attraction on a rectangular grid of section initial conditions,
// plus a box-counting estimate of the boundary dimension.

#ifndef DSD_BASIN_HPP
#define DSD_BASIN_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "dsd/model.hpp"
#include "dsd/poincare.hpp"

namespace dsd {

struct GridSpec {
    double p_min = -6.0;
    double p_max = 6.0;
    double q_min = -6.0;
    double q_max = 6.0;
    int nx = 150;
    int ny = 150;

    void validate() const;

    std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

    /// Cell-center initial condition of cell (i, j).
    State2 center(int i, int j) const;
};

/// Stored class codes.
enum class BasinClass : std::uint8_t {
    undecided = 0,
    periodic = 1,
    escape_positive = 2,
    escape_negative = 3,
};

BasinClass to_basin_class(AttractorKind k);

struct BasinMap {
    GridSpec grid;
    /// Row-major, index j * nx + i.
    std::vector<std::uint8_t> classes;
    std::vector<int> periods;
    ModelParams params_used;
    PoincareOptions opts_used;

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) + static_cast<std::size_t>(i);
    }

    /// Throws std::invalid_argument if array sizes or period/class agreement
    /// are violated.
    void validate() const;
};

/// Desk-scale sweep defaults: the period-map defaults with max_iterations
/// capped at 300 (transient 200) unless the low-damping budget applies.
PoincareOptions basin_defaults(const ModelParams& params);

/// Classifies every cell center. `threads` == 0 uses the hardware
/// concurrency; the result does not depend on the thread count.
BasinMap compute_basin(const ModelParams& params, const GridSpec& grid, const PoincareOptions& opts,
                       unsigned threads = 0);

struct BoxCountResult {
    std::vector<int> scales;
    std::vector<long> counts;
    double dimension = 0.0;
    double r_squared = 0.0;
};

/// A cell is on the boundary when a 4-neighbour carries a different class
/// code. Counts s x s boxes holding at least one boundary cell for each scale
/// and fits log N against log(1/s). Throws std::invalid_argument for maps
/// smaller than 64 x 64 or scales outside {1, 2, 4, 8, 16} that do not divide
/// the grid; dsd::degenerate_boundary_error for a single-class map.
BoxCountResult box_count_boundary(const BasinMap& map, const std::vector<int>& scales);

/// Scales from {1, 2, 4, 8, 16} that divide both grid dimensions.
std::vector<int> admissible_scales(const GridSpec& grid);

struct BasinSummary {
    std::size_t total = 0;
    std::map<int, std::size_t> by_class;
    /// Periodic cells keyed by period.
    std::map<int, std::size_t> by_period;

    std::size_t count(BasinClass c) const;
    std::size_t period_count(int k) const;
    double fraction(BasinClass c) const;
};

BasinSummary basin_summary(const BasinMap& map);

}  // namespace dsd

#endif  // DSD_BASIN_HPP
