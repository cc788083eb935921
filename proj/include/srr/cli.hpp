#pragma once

#include <string>
#include <vector>

namespace srr {

// The command-line front end as a library function so tests can drive it
// in-process. args excludes the program name, e.g.
//     {"gen", "--n", "24", "--m", "8", "--d", "6", "-o", "inst.json"}
//
// Exit codes: 0 success, 1 verification failures, 2 usage or configuration
// errors, 3 numerical failures (a factorization that should have been PD).
int run_cli(const std::vector<std::string>& args);

} // namespace srr
