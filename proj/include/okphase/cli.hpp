#pragma once

/// @file cli.hpp
/// @brief Command-line front end: run, sweep, continue, asymptotics,
/// classify and energy subcommands.
///
/// Exit codes: 0 success, 1 invalid input, 2 numerical abort.

#include <iosfwd>
#include <string>
#include <vector>

namespace okphase {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

/// `args` excludes the program name.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, char** argv);

}  // namespace okphase
