#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qmcslice::cli {

enum ExitCode { kOk = 0, kUsage = 2, kParse = 3, kCapability = 4, kNumerical = 5 };

// Runs the command line (without the program name). Environment:
//   QMCSLICE_OUTPUT_DIR  directory for relative output paths
//   QMCSLICE_STREAM      default RNG stream offset
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmcslice::cli
