#include "abstrip/scenarios.hpp"

#include <algorithm>

namespace abstrip {

namespace {

// Offer laws of the two ranking algorithms, flattened from their decision
// trees: arm 0 lists the rare good late (5% of visitors scroll to it), arm 1
// lists it first. 80% of visitors who see the rare good prefer it and buy it
// with probability 0.10; everybody else buys good 1 with probability 0.05.
ScenarioSource ranking_source() {
    ScenarioSource s;
    s.p = "0.5";
    s.q = "1";
    s.mu0 = {{0, 0, "0.948"}, {0, 1, "0.004"}, {1, 0, "0.048"}};
    s.mu1 = {{0, 0, "0.91"}, {0, 1, "0.08"}, {1, 0, "0.01"}};
    s.nu = {{0, 0, "0.95"}, {1, 0, "0.05"}};
    s.schedule = {0.5, 0.5};
    return s;
}

// 1% of visitors are picky: they always find the rare good and buy it with
// probability 1/2, and leave without buying once it is sold out. Mixed with
// the ranking laws: mu_i = 0.99 mu_i(ranking) + 0.01 (delta_(0,0) + delta_(0,1))/2.
ScenarioSource picky_source() {
    ScenarioSource s;
    s.p = "0.5";
    s.q = "1";
    s.mu0 = {{0, 0, "0.94352"}, {0, 1, "0.00896"}, {1, 0, "0.04752"}};
    s.mu1 = {{0, 0, "0.9059"}, {0, 1, "0.0842"}, {1, 0, "0.0099"}};
    s.nu = {{0, 0, "0.9505"}, {1, 0, "0.0495"}};
    s.schedule = {0.5, 0.5};
    return s;
}

// Identical arms and an inventory (c_n = n) that can never run out: the
// classical independent model with conversion rate 0.05 in both arms.
ScenarioSource classical_null_source() {
    ScenarioSource s;
    s.p = "0.5";
    s.q = "1";
    s.mu0 = {{0, 0, "0.95"}, {0, 1, "0.02"}, {1, 0, "0.03"}};
    s.mu1 = s.mu0;
    s.nu = {{0, 0, "0.95"}, {1, 0, "0.05"}};
    s.schedule = {1.0, 1.0};
    return s;
}

NamedScenario make(std::string id, std::string description, ScenarioSource source, double d_inf,
                   std::vector<ExpectedValue> expected) {
    NamedScenario n;
    n.id = std::move(id);
    n.description = std::move(description);
    n.scenario = source.instantiate<double>();
    n.source = std::move(source);
    n.d_inf = d_inf;
    n.expected = std::move(expected);
    return n;
}

const std::vector<NamedScenario>& registry() {
    static const std::vector<NamedScenario> all = [] {
        std::vector<NamedScenario> v;
        v.push_back(make("ranking", "two ranking algorithms sharing 1000 units of a rare good", ranking_source(), 0.5,
                         {
                             {"p0", 0.052, 1e-12, "exact"},
                             {"p1", 0.09, 1e-12, "exact"},
                             {"p_theta", 0.05, 1e-12, "exact"},
                             {"m_eta", 0.042, 1e-12, "exact"},
                             {"delta", -1.037833, 1e-6, "-5 sqrt(19)/21"},
                             {"asym_reject_prob", 0.1795898, 1e-6, "closed form at alpha = 0.05"},
                             {"d2", 1.0 / 84.0, 1e-12, "exact"},
                             {"d3", 5.0 / 21.0, 1e-12, "exact"},
                             {"marginal_mean0", 0.25, 1e-12, "d_inf (p0 - p_theta) / m0_eta"},
                             {"marginal_mean1", 0.25, 1e-12, "d_inf (p1 - p_theta) / m1_eta"},
                             {"l0_rate", 0.025, 1e-12, "c_inf = 0"},
                             {"l1_rate", 0.025, 1e-12, "c_inf = 0"},
                             {"tau1_over_c", 1.0 / 0.042, 1e-9, "1 / m_eta"},
                         }));
        v.push_back(make("ranking-separate", "the ranking algorithms, each on its own inventory", ranking_source(),
                         0.5,
                         {
                             {"c0_separate", 0.05, 1e-12, "p_theta, c_inf = 0"},
                             {"c1_separate", 0.05, 1e-12, "p_theta, c_inf = 0"},
                             {"marginal_mean0", 0.25, 1e-12, "d_inf (p0 - p_theta) / m0_eta"},
                             {"marginal_mean1", 0.25, 1e-12, "d_inf (p1 - p_theta) / m1_eta"},
                         }));
        v.push_back(make("picky", "ranking with 1% picky customers who only buy the rare good", picky_source(), 0.5,
                         {
                             {"p0", 0.05648, 1e-12, "exact"},
                             {"p1", 0.0941, 1e-12, "exact"},
                             {"p_theta", 0.0495, 1e-12, "exact"},
                             {"m_eta", 0.04658, 1e-12, "exact"},
                             {"delta", -0.930852, 1e-6, "sign: arm 0 minus arm 1"},
                             {"asym_reject_prob", 0.1536348, 1e-6, "closed form at alpha = 0.05"},
                             {"marginal_mean0", 349.0 / 896.0, 1e-12, "349/896"},
                             {"marginal_mean1", 223.0 / 842.0, 1e-12, "223/842"},
                             {"asym_power", 0.001933, 5e-4, "Monte Carlo, 2e6 draws"},
                         }));
        v.push_back(make("classical-null", "identical arms, inventory never binding", classical_null_source(), 0.0,
                         {
                             {"p0", 0.05, 1e-12, "exact"},
                             {"p1", 0.05, 1e-12, "exact"},
                             {"delta", 0.0, 1e-12, "identical arms"},
                             {"asym_reject_prob", 0.05, 1e-10, "nominal level"},
                         }));
        return v;
    }();
    return all;
}

}  // namespace

const ExpectedValue& NamedScenario::expect(std::string_view name) const {
    auto it = std::find_if(expected.begin(), expected.end(), [&](const auto& e) { return e.name == name; });
    if (it == expected.end()) throw std::out_of_range("scenario " + id + " has no expected value " + std::string(name));
    return *it;
}

std::vector<std::string> scenario_ids() {
    std::vector<std::string> ids;
    for (const auto& s : registry()) ids.push_back(s.id);
    return ids;
}

const NamedScenario& get_scenario(std::string_view id) {
    for (const auto& s : registry())
        if (s.id == id) return s;
    std::string known;
    for (const auto& k : scenario_ids()) known += (known.empty() ? "" : ", ") + k;
    throw UnknownScenario("unknown scenario '" + std::string(id) + "'; known: " + known);
}

}  // namespace abstrip
