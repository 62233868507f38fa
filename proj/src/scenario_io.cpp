#include "abstrip/scenario_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

namespace abstrip {

namespace {

using nlohmann::json;

template <typename T>
T yaml_get(const YAML::Node& node, const std::string& key, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) throw ScenarioParseError("missing key '" + key + "' in " + where);
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ScenarioParseError("key '" + key + "' in " + where + " has the wrong type");
    }
}

OfferDistribution yaml_distribution(const YAML::Node& root, const std::string& name) {
    const YAML::Node dist = root[name];
    if (!dist || !dist.IsMap()) throw ScenarioParseError("missing mapping '" + name + "'");
    const YAML::Node atoms = dist["atoms"];
    if (!atoms || !atoms.IsSequence()) throw ScenarioParseError("'" + name + ".atoms' must be a list");
    OfferDistribution out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const YAML::Node a = atoms[i];
        const std::string where = name + ".atoms[" + std::to_string(i) + "]";
        if (!a.IsMap()) throw ScenarioParseError(where + " must be a mapping");
        Atom<double> atom;
        atom.x = yaml_get<std::int64_t>(a, "x", where);
        atom.y = a["y"] ? yaml_get<std::int64_t>(a, "y", where) : 0;
        atom.prob = yaml_get<double>(a, "prob", where);
        out.atoms.push_back(atom);
    }
    return out;
}

ScenarioFile parse_yaml(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ScenarioParseError(std::string("malformed scenario: ") + e.what());
    }
    if (!root.IsMap()) throw ScenarioParseError("scenario must be a mapping");
    ScenarioFile out;
    if (root["id"]) out.id = yaml_get<std::string>(root, "id", "scenario");
    auto& s = out.scenario;
    s.p = yaml_get<double>(root, "p", "scenario");
    s.q = yaml_get<double>(root, "q", "scenario");
    const YAML::Node sched = root["schedule"];
    if (!sched || !sched.IsMap()) throw ScenarioParseError("missing mapping 'schedule'");
    s.schedule.d = yaml_get<double>(sched, "d", "schedule");
    s.schedule.rho = yaml_get<double>(sched, "rho", "schedule");
    s.mu0 = yaml_distribution(root, "mu0");
    s.mu1 = yaml_distribution(root, "mu1");
    s.nu = yaml_distribution(root, "nu");
    return out;
}

template <typename T>
T json_get(const json& node, const std::string& key, const std::string& where) {
    if (!node.contains(key)) throw ScenarioParseError("missing key '" + key + "' in " + where);
    try {
        return node.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioParseError("key '" + key + "' in " + where + " has the wrong type");
    }
}

OfferDistribution json_distribution(const json& root, const std::string& name) {
    if (!root.contains(name) || !root[name].is_object()) throw ScenarioParseError("missing object '" + name + "'");
    const json& dist = root[name];
    if (!dist.contains("atoms") || !dist["atoms"].is_array())
        throw ScenarioParseError("'" + name + ".atoms' must be a list");
    OfferDistribution out;
    std::size_t i = 0;
    for (const auto& a : dist["atoms"]) {
        const std::string where = name + ".atoms[" + std::to_string(i++) + "]";
        if (!a.is_object()) throw ScenarioParseError(where + " must be an object");
        Atom<double> atom;
        atom.x = json_get<std::int64_t>(a, "x", where);
        atom.y = a.contains("y") ? json_get<std::int64_t>(a, "y", where) : 0;
        atom.prob = json_get<double>(a, "prob", where);
        out.atoms.push_back(atom);
    }
    return out;
}

ScenarioFile parse_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioParseError(std::string("malformed scenario JSON: ") + e.what());
    }
    if (!root.is_object()) throw ScenarioParseError("scenario must be an object");
    ScenarioFile out;
    if (root.contains("id")) out.id = json_get<std::string>(root, "id", "scenario");
    auto& s = out.scenario;
    s.p = json_get<double>(root, "p", "scenario");
    s.q = json_get<double>(root, "q", "scenario");
    if (!root.contains("schedule") || !root["schedule"].is_object())
        throw ScenarioParseError("missing object 'schedule'");
    s.schedule.d = json_get<double>(root["schedule"], "d", "schedule");
    s.schedule.rho = json_get<double>(root["schedule"], "rho", "schedule");
    s.mu0 = json_distribution(root, "mu0");
    s.mu1 = json_distribution(root, "mu1");
    s.nu = json_distribution(root, "nu");
    return out;
}

json distribution_json(const OfferDistribution& d) {
    json atoms = json::array();
    for (const auto& a : d.atoms) atoms.push_back({{"x", a.x}, {"y", a.y}, {"prob", a.prob}});
    return {{"atoms", atoms}};
}

}  // namespace

std::string shortest_decimal(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

ScenarioFile parse_scenario(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') return parse_json(text);
    return parse_yaml(text);
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto out = parse_scenario(buf.str());
    if (out.id.empty()) out.id = path.stem().string();
    return out;
}

std::string to_yaml(const Scenario& s, std::string_view id) {
    std::ostringstream out;
    if (!id.empty()) out << "id: " << id << "\n";
    out << "p: " << shortest_decimal(s.p) << "\n";
    out << "q: " << shortest_decimal(s.q) << "\n";
    out << "schedule: {d: " << shortest_decimal(s.schedule.d) << ", rho: " << shortest_decimal(s.schedule.rho)
        << "}\n";
    auto dist = [&](const char* name, const OfferDistribution& d) {
        out << name << ":\n  atoms:\n";
        for (const auto& a : d.atoms)
            out << "    - {x: " << a.x << ", y: " << a.y << ", prob: " << shortest_decimal(a.prob) << "}\n";
    };
    dist("mu0", s.mu0);
    dist("mu1", s.mu1);
    dist("nu", s.nu);
    return out.str();
}

std::string to_json(const Scenario& s, std::string_view id) {
    json root;
    if (!id.empty()) root["id"] = std::string(id);
    root["p"] = s.p;
    root["q"] = s.q;
    root["schedule"] = {{"d", s.schedule.d}, {"rho", s.schedule.rho}};
    root["mu0"] = distribution_json(s.mu0);
    root["mu1"] = distribution_json(s.mu1);
    root["nu"] = distribution_json(s.nu);
    return root.dump(2) + "\n";
}

}  // namespace abstrip
