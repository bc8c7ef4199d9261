// cli.hpp
// Subcommand front end: simulate / enhance / eval. Returns a process exit
// code; all failures are reported on stderr with the violated invariant.

#ifndef BEAMKIT_CLI_HPP
#define BEAMKIT_CLI_HPP

#include <string>
#include <vector>

namespace beamkit {

int run_cli(const std::vector<std::string>& args);

}  // namespace beamkit

#endif  // BEAMKIT_CLI_HPP
