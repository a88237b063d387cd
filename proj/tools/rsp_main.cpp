#include "rsp/cli.hpp"

int main(int argc, char** argv) {
  return rsp::run_cli(argc, argv);
}
