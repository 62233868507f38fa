#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "abstrip/model.hpp"

namespace abstrip {

/// Scenario parameters as exact decimal literals, so the same data can be
/// instantiated in double or in an exact rational type.
struct ScenarioSource {
    struct AtomText {
        std::int64_t x, y;
        std::string prob;
    };
    std::string p, q;
    std::vector<AtomText> mu0, mu1, nu;
    InventorySchedule schedule;

    template <typename Scalar>
    BasicScenario<Scalar> instantiate() const {
        auto dist = [](const std::vector<AtomText>& atoms) {
            BasicOfferDistribution<Scalar> d;
            for (const auto& a : atoms) d.atoms.push_back({a.x, a.y, exact_decimal<Scalar>(a.prob)});
            return d;
        };
        BasicScenario<Scalar> s;
        s.p = exact_decimal<Scalar>(p);
        s.q = exact_decimal<Scalar>(q);
        s.mu0 = dist(mu0);
        s.mu1 = dist(mu1);
        s.nu = dist(nu);
        s.schedule = schedule;
        return s;
    }
};

/// A theory value shipped with a built-in scenario, with the absolute
/// tolerance it is checked against.
struct ExpectedValue {
    std::string name;
    double value;
    double tolerance;
    std::string note;
};

struct NamedScenario {
    std::string id;
    std::string description;
    ScenarioSource source;
    Scenario scenario;
    double d_inf = 0.5;
    double alpha = 0.05;
    std::vector<ExpectedValue> expected;

    /// Throws std::out_of_range for an unknown name.
    const ExpectedValue& expect(std::string_view name) const;
};

class UnknownScenario : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::vector<std::string> scenario_ids();

/// Built-in scenario by id; UnknownScenario lists the known ids.
const NamedScenario& get_scenario(std::string_view id);

}  // namespace abstrip
