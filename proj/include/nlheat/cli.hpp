#pragma once

// Command-line front end. Subcommands: perimeter, density, heat-content,
// expansion, verify, sample.
//
// Exit codes: 0 success, 1 verification FAIL, 2 configuration error,
// 3 numeric failure, 4 inconclusive verification.

#include <ostream>
#include <string>
#include <vector>

namespace nlheat::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace nlheat::cli
