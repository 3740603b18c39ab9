#pragma once

#include <iosfwd>
#include <vector>

#include "brforest/experiment.hpp"

namespace brf {

// Self-contained SVG line chart of one dataset's BR curves: one polyline per
// configuration, axes labeled bootstrap rate vs accuracy [%].
void write_br_curves_svg(const std::vector<BRCurve>& curves, std::ostream& out);

}  // namespace brf
