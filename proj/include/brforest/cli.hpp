#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brf {

// Full command-line front end (preprocess, grid, report, meta, synth, fit,
// predict). Exit codes: 0 success, 1 usage error, 2 data error, 3 internal.
// BRFOREST_SEED, when set, overrides any configured seed.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brf
