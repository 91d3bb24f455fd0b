#pragma once

#include <string>

#include "symphony/config.hpp"

namespace symphony::cli {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // usage / config error
inline constexpr int kExitInvariant = 2;  // invariant or format failure
inline constexpr int kExitIo = 3;         // missing / unreadable files

int cmd_train(const RunConfig& config);
int cmd_eval(const std::string& checkpoint, const std::string& env_name,
             int episodes, std::uint64_t seed, const std::string& out_csv,
             bool sigma_one);
int cmd_verify(const std::string& out_dir);
int cmd_inspect(const std::string& checkpoint);

/// Full argv entry point (the `symphony` binary's main).
int run_main(int argc, char** argv);

}  // namespace symphony::cli
