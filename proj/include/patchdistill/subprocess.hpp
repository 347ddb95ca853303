#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pd {

struct CommandResult {
  int exit_code = -1;  // -1 when killed by a signal or timed out
  bool timed_out = false;
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};
};

struct CommandOptions {
  std::filesystem::path cwd;                 // empty: inherit
  std::map<std::string, std::string> env;    // added to the inherited environment
};

// Runs argv[0] with the given arguments, capturing stdout and stderr. The
// child gets its own process group; the whole group is killed on timeout.
CommandResult run_command(const std::vector<std::string>& argv, const CommandOptions& options,
                          std::chrono::milliseconds timeout);

// Runs `command` through /bin/sh -c.
CommandResult run_shell(const std::string& command, const CommandOptions& options,
                        std::chrono::milliseconds timeout);

}  // namespace pd
