#pragma once

#include <string>
#include <vector>

#include "dsel/config.hpp"

namespace dsel::cli {

// Exit codes: 0 success, 2 configuration error, 3 runtime/solver error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

// Command bodies, exposed for direct testing. They throw on failure.
void cmd_label(const RunConfig& cfg);
void cmd_run(const RunConfig& cfg);
void cmd_analyze(const RunConfig& cfg);

}  // namespace dsel::cli
