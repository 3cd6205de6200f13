#include "options.hpp"

#include "pansr/error.hpp"

namespace pansr::cli {

CLI::Option* Bindings::add_flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
  CLI::Option* opt = app->add_flag(flag, var, help);
  entries_.push_back({key_of(flag), opt, [&var](const nlohmann::json& j) { var = j.get<bool>(); },
                      [&var] { return nlohmann::json(var); }});
  return opt;
}

void Bindings::apply(const nlohmann::json& section) const {
  if (!section.is_object()) return;
  for (const auto& e : entries_) {
    if (e.opt->count() > 0 || !section.contains(e.key)) continue;
    try {
      e.set(section.at(e.key));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError("config key '" + e.key + "': " + ex.what());
    }
  }
}

nlohmann::ordered_json Bindings::resolved() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& e : entries_) j[e.key] = e.get();
  return j;
}

std::string Bindings::key_of(const std::string& flag) {
  // "--hr-tile,-t" -> "hr_tile"
  std::string name = flag.substr(0, flag.find(','));
  while (!name.empty() && name.front() == '-') name.erase(name.begin());
  for (char& c : name)
    if (c == '-') c = '_';
  return name;
}

}  // namespace pansr::cli
