#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "abstrip/model.hpp"

namespace abstrip {

/// Malformed or incomplete scenario text (as opposed to a well-formed
/// scenario that violates an invariant, which is a ValidationError).
class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioFile {
    std::string id;
    Scenario scenario;
};

/// Parses the YAML scenario format, or its JSON rendering when the text starts
/// with '{'. Keys: id (optional), p, q, schedule {d, rho}, and mu0/mu1/nu each
/// holding atoms: [{x, y, prob}, ...] (y may be omitted for nu). No invariant
/// checks are made here.
ScenarioFile parse_scenario(std::string_view text);

/// Reads and parses a file. The id defaults to the file stem.
ScenarioFile load_scenario_file(const std::filesystem::path& path);

std::string to_yaml(const Scenario& s, std::string_view id);
std::string to_json(const Scenario& s, std::string_view id);

/// Shortest decimal text that reads back to exactly `v`.
std::string shortest_decimal(double v);

}  // namespace abstrip
