#include <iostream>
#include <string>
#include <vector>

#include "mner/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mner::cli::run(args, std::cout, std::cerr);
}
