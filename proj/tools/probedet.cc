#include <iostream>
#include <string>
#include <vector>

#include "probedet/commands.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return probedet::RunCli(args, std::cout, std::cerr);
}
