#pragma once

#include <iosfwd>

#include "arvar/bench.hpp"

namespace arvar {

/// Run-averaged sigma with +-1 and +-2 std bands against the true sigma.
void write_recovery_svg(std::ostream& out, const ExperimentReport& report);

/// Column-normalized density of predicted vs true sigma with the diagonal.
void write_density_svg(std::ostream& out, const DensityMap& map);

}  // namespace arvar
