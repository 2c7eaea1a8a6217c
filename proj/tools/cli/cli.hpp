#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace weakeq::cli {

enum ExitCode : int { kOk = 0, kVerifiedFailure = 1, kUsage = 2 };

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Rounds to 10 significant digits; non-finite values become "inf", "-inf"
/// or "nan" strings.
nlohmann::ordered_json json_number(double v);

}  // namespace weakeq::cli
