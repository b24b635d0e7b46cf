// Text and image serialization: trajectory/basin/cycle CSV, flat key=value
// reports and binary P6 basin images.

#ifndef DSD_IO_HPP
#define DSD_IO_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsd/basin.hpp"
#include "dsd/integrator.hpp"
#include "dsd/melnikov.hpp"
#include "dsd/model.hpp"
#include "dsd/poincare.hpp"

namespace dsd::io {

/// File could not be opened, read or written, or its content is malformed.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip text (17 significant digits).
std::string format_number(double v);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void write_key_values(std::ostream& os, const KeyValues& kv);

KeyValues params_key_values(const ModelParams& params);
KeyValues melnikov_key_values(const MelnikovReport& report, bool include_roots);

/// `t,p,q` header and one row per sample; an escaped run ends with
/// `# escaped sign=<+1|-1> t=<time>`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const IntegrationOutcome& outcome);

/// `k,index,p,q` rows for a periodic cycle.
void write_cycle_csv(std::ostream& os, const AttractorClass& c);

/// `i,j,p0,q0,class,period`, row-major with j outer and i inner.
void write_basin_csv(std::ostream& os, const BasinMap& map);

/// Rebuilds the grid, class codes and periods from a basin CSV. The window
/// is recovered from the cell centers. Throws io_error on malformed input.
BasinMap read_basin_csv(std::istream& is);

using Rgb = std::array<std::uint8_t, 3>;

Rgb basin_color(std::uint8_t class_code, int period);

/// Binary P6, maxval 255, one pixel per cell, row j = ny - 1 first.
void write_basin_ppm(std::ostream& os, const BasinMap& map);

}  // namespace dsd::io

#endif  // DSD_IO_HPP
