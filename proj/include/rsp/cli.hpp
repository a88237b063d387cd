#pragma once

#include <iostream>

namespace rsp {

int run_cli(int argc, char** argv);

inline int run_cli(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::cerr << "not yet wired\n";
  return 1;
}

}  // namespace rsp
