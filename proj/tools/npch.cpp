#include <iostream>
#include <string>
#include <vector>

#include "npch/acceptance.hpp"
#include "npch/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "usage: npch <command> [options]\n"
                 "commands: space-check, uniqueness, calculus-check, isometry analyze,\n"
                 "          solve cylinder, bochner verify, acceptance\n"
                 "run 'npch <command> --help' for options\n";
    return args.empty() ? npch::kExitUsage : npch::kExitPass;
  }
  if (args[0] == "--version") {
    std::cout << npch::kToolkitVersion << "\n";
    return npch::kExitPass;
  }
  if (args[0] == "acceptance") return npch::acceptance_main({args.begin() + 1, args.end()});
  npch::RunConfig cfg;
  try {
    cfg = npch::parse_config(args);
  } catch (const npch::HelpRequested& h) {
    std::cout << h.what();
    return npch::kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return npch::exit_code_for(e);
  }
  return npch::execute(cfg);
}
