#include <csignal>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  return refcam::cli::run_cli(argc, argv, std::cout, std::cerr);
}
