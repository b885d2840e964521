#ifndef ORBIT_AVERAGER_CLI_HPP
#define ORBIT_AVERAGER_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace orbit_averager {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitBadConfig = 1,
  kExitDegenerate = 2,
  kExitOutOfRegion = 3,
  kExitUnverified = 4,
  kExitSelftestFailed = 5,
};

/// Entry point of `orbit-averager`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_CLI_HPP
