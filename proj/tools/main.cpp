#include "cli.hpp"

int main(int argc, char** argv) {
  return symphony::cli::run_main(argc, argv);
}
