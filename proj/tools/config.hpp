#pragma once

// Resolved run configuration: built-in defaults, then the config file (an
// optional section named after the subcommand overrides top-level keys),
// then command-line overrides. Unknown keys and type mismatches are errors.

#include "esa/errors.hpp"
#include "esa/experiments.hpp"
#include "esa/registration.hpp"
#include "esa/statistics.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esa::cli {

using nlohmann::json;

json merge_checked(const json& defaults, const json& user, const std::string& where = "");

/// Reads a JSON config file; missing files are input errors.
json read_config_file(const std::filesystem::path& path);

/// Selects the keys relevant to `command` from a whole config document.
json section_for(const json& doc, const std::string& command, const std::vector<std::string>& all_commands);

std::pair<int, int> parse_grid(const std::string& text);

template <class T>
T value(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ArgumentError("config key \"" + key + "\" is missing or has the wrong type");
    }
}

json registration_defaults();
RegistrationOptions registration_from(const json& j);
json karcher_defaults();
KarcherOptions karcher_from(const json& karcher, const json& registration);
json family_defaults();
ShapeFamily family_from(const json& j);
Template template_from(const std::string& s);
json icp_defaults();
IcpOptions icp_from(const json& j);

std::vector<std::filesystem::path> path_list(const json& j, const std::string& key);

} // namespace esa::cli
