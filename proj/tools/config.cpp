#include "config.hpp"

#include "esa/errors.hpp"

#include <fstream>

namespace esa::cli {
namespace {

bool compatible(const json& def, const json& val) {
    if (def.is_null() || val.is_null()) return true;
    if (def.is_number() && val.is_number()) return !(def.is_number_integer() && val.is_number_float());
    return def.type() == val.type();
}

} // namespace

json merge_checked(const json& defaults, const json& user, const std::string& where) {
    if (!user.is_object()) throw ArgumentError("config" + (where.empty() ? "" : " section \"" + where + "\"") + " must be a JSON object");
    json out = defaults;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!defaults.contains(it.key())) throw ArgumentError("unknown config key \"" + key + "\"");
        const json& def = defaults.at(it.key());
        if (!compatible(def, it.value())) throw ArgumentError("config key \"" + key + "\" has the wrong type");
        if (def.is_object() && !def.empty()) {
            out[it.key()] = merge_checked(def, it.value(), key);
        } else {
            out[it.key()] = it.value();
        }
    }
    return out;
}

json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArgumentError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

json section_for(const json& doc, const std::string& command, const std::vector<std::string>& all_commands) {
    if (!doc.is_object()) throw ArgumentError("config file must hold a JSON object");
    json out = json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (std::find(all_commands.begin(), all_commands.end(), it.key()) != all_commands.end()) continue;
        out[it.key()] = it.value();
    }
    if (doc.contains(command)) {
        const json& sec = doc.at(command);
        if (!sec.is_object()) throw ArgumentError("config section \"" + command + "\" must be an object");
        for (auto it = sec.begin(); it != sec.end(); ++it) out[it.key()] = it.value();
    }
    return out;
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(text);
        std::size_t a = 0, b = 0;
        const int nu = std::stoi(text.substr(0, x), &a);
        const int nv = std::stoi(text.substr(x + 1), &b);
        if (a != x || b != text.size() - x - 1) throw std::invalid_argument(text);
        return {nu, nv};
    } catch (const std::exception&) {
        throw ArgumentError("grid must look like <n_u>x<n_v>, got \"" + text + "\"");
    }
}

json registration_defaults() {
    const RegistrationOptions d;
    return {{"max_iters", d.reparam.max_iters},   {"tol_rel", d.reparam.tol_rel},
            {"basis_degree", d.reparam.basis_degree}, {"rounds", d.rounds},
            {"initial_step", d.reparam.initial_step}, {"max_step", d.reparam.max_step},
            {"step_floor", d.reparam.step_floor},   {"fd_step", d.reparam.fd_step}};
}

RegistrationOptions registration_from(const json& j) {
    RegistrationOptions o;
    o.reparam.max_iters = value<int>(j, "max_iters");
    o.reparam.tol_rel = value<double>(j, "tol_rel");
    o.reparam.basis_degree = value<int>(j, "basis_degree");
    o.rounds = value<int>(j, "rounds");
    o.reparam.initial_step = value<double>(j, "initial_step");
    o.reparam.max_step = value<double>(j, "max_step");
    o.reparam.step_floor = value<double>(j, "step_floor");
    o.reparam.fd_step = value<double>(j, "fd_step");
    if (o.reparam.max_iters < 0 || o.rounds < 1 || o.reparam.basis_degree < 1) {
        throw ArgumentError("registration: max_iters >= 0, rounds >= 1 and basis_degree >= 1 are required");
    }
    if (!(o.reparam.tol_rel >= 0.0 && o.reparam.initial_step > 0.0 && o.reparam.max_step > 0.0 &&
          o.reparam.step_floor > 0.0 && o.reparam.fd_step > 0.0)) {
        throw ArgumentError("registration: step sizes must be positive and tol_rel nonnegative");
    }
    return o;
}

json karcher_defaults() { return {{"iterations", 5}, {"initial_index", 0}, {"random_init", false}}; }

KarcherOptions karcher_from(const json& k, const json& registration) {
    KarcherOptions o;
    o.registration = registration_from(registration);
    o.iterations = value<int>(k, "iterations");
    o.initial_index = value<int>(k, "initial_index");
    if (o.iterations < 0) throw ArgumentError("karcher.iterations must be nonnegative");
    return o;
}

json family_defaults() { return {{"kind", "bumpy_sphere"}, {"amplitude", 0.1}, {"degree", 3}, {"a", 1.0}, {"b", 1.0}, {"c", 1.0}}; }

ShapeFamily family_from(const json& j) {
    const auto kind = value<std::string>(j, "kind");
    if (kind == "sphere") return ShapeFamily::sphere();
    if (kind == "ellipsoid") return ShapeFamily::ellipsoid(value<double>(j, "a"), value<double>(j, "b"), value<double>(j, "c"));
    if (kind == "bumpy_sphere") return ShapeFamily::bumpy_sphere(value<double>(j, "amplitude"), value<int>(j, "degree"));
    throw ArgumentError("family.kind must be sphere, ellipsoid or bumpy_sphere");
}

Template template_from(const std::string& s) {
    if (s == "mean") return Template::KarcherMean;
    if (s == "first") return Template::First;
    throw ArgumentError("template must be \"mean\" or \"first\"");
}

json icp_defaults() {
    const IcpOptions d;
    return {{"max_iters", d.max_iters}, {"tol", d.tol}, {"precenter", d.precenter}};
}

IcpOptions icp_from(const json& j) {
    IcpOptions o;
    o.max_iters = value<int>(j, "max_iters");
    o.tol = value<double>(j, "tol");
    o.precenter = value<bool>(j, "precenter");
    if (o.max_iters < 1 || !(o.tol >= 0.0)) throw ArgumentError("icp: max_iters >= 1 and tol >= 0 required");
    return o;
}

std::vector<std::filesystem::path> path_list(const json& j, const std::string& key) {
    std::vector<std::filesystem::path> out;
    if (!j.contains(key) || j.at(key).is_null()) return out;
    if (!j.at(key).is_array()) throw ArgumentError("config key \"" + key + "\" must be a list of paths");
    for (const json& p : j.at(key)) {
        if (!p.is_string()) throw ArgumentError("config key \"" + key + "\" must be a list of paths");
        out.emplace_back(p.get<std::string>());
    }
    return out;
}

} // namespace esa::cli
