#include <cstdlib>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "pansr/error.hpp"
#include "pansr/parallel.hpp"

namespace {

// --seed beats the config file, which beats PANSR_SEED.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, const nlohmann::json& config) {
  if (flag->count() > 0) return flag_value;
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  if (const char* env = std::getenv("PANSR_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw pansr::ValidationError(std::string("PANSR_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pansr;
  CLI::App app{"pansr: pansharpening, super-resolution training and 12-bit image quality metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Global seed (fallback: PANSR_SEED, then 0)");
  app.add_option("--config", config_path, "JSON config; command-line flags take precedence");
  auto commands = cli::register_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ValidationError("cannot open config " + config_path);
      try {
        config = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(config_path + ": " + e.what());
      }
      if (!config.is_object()) throw ValidationError(config_path + ": top level must be an object");
    }
    if (app.get_option("--threads")->count() == 0 && config.contains("threads"))
      threads = config.at("threads").get<int>();
    cli::Context ctx{resolve_seed(seed_opt, seed, config), threads};
    if (threads > 0) set_thread_count(threads);

    for (auto& cmd : commands) {
      if (!cmd->app->parsed()) continue;
      const std::string name = cmd->app->get_name();
      if (config.contains(name)) cmd->bindings.apply(config.at(name));
      nlohmann::ordered_json resolved;
      resolved["command"] = name;
      resolved["seed"] = ctx.seed;
      resolved["threads"] = thread_count();
      resolved["options"] = cmd->bindings.resolved();
      std::cerr << "config: " << resolved.dump() << "\n";
      cmd->run(ctx);
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
