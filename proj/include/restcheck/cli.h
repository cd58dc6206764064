#ifndef RESTCHECK_CLI_H_
#define RESTCHECK_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace restcheck {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonLinearizable = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitFailure = 3;  // I/O, parse or runtime errors
inline constexpr int kExitUsage = 64;

// Subcommands: validate-spec, gen-preview, run, check, test, render, fixture.
// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace restcheck

#endif  // RESTCHECK_CLI_H_
