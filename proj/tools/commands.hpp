#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "options.hpp"

namespace pansr::cli {

struct Context {
  std::uint64_t seed = 0;
  int threads = 0;
};

class Command {
 public:
  virtual ~Command() = default;
  CLI::App* app = nullptr;
  Bindings bindings;
  virtual void run(const Context& ctx) = 0;
};

/// Registers every subcommand on `root`.
std::vector<std::unique_ptr<Command>> register_commands(CLI::App& root);

}  // namespace pansr::cli
