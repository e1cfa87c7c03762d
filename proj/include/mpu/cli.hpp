#pragma once

#include <string>
#include <vector>

namespace mpu {

// Entry point behind the mpu binary; factored out so tests can invoke
// subcommands in process. Returns 0 on success; on failure prints one
// "error: <category>: <message>" line to stderr and returns nonzero.
int cli_main(const std::vector<std::string>& args);

}  // namespace mpu
