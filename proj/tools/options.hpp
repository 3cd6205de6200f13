#pragma once

// Flag bindings that can also be filled from a JSON config section. A value
// given on the command line always wins over the config file.

#include <CLI11.hpp>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

namespace pansr::cli {

class Bindings {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, var, help)->capture_default_str();
    const std::string key = key_of(flag);
    entries_.push_back({key, opt, [&var](const nlohmann::json& j) { var = j.get<T>(); },
                        [&var] { return nlohmann::json(var); }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help);

  /// Fills every option not given on the command line from `section`.
  void apply(const nlohmann::json& section) const;
  /// Final values keyed by option name (dashes become underscores).
  nlohmann::ordered_json resolved() const;

  static std::string key_of(const std::string& flag);

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const nlohmann::json&)> set;
    std::function<nlohmann::json()> get;
  };
  std::vector<Entry> entries_;
};

}  // namespace pansr::cli
