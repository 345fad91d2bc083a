#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diamonds::cli {

enum ExitCode : int { ok = 0, usage = 2, numeric_failure = 3, validation_failure = 4 };

/// Runs the command line `diamond <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diamonds::cli
