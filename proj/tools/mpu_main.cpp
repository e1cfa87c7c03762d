#include <string>
#include <vector>

#include "mpu/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mpu::cli_main(args);
}
