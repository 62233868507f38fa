#include "abstrip/scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "abstrip/asymptotics.hpp"
#include "abstrip/scenario_io.hpp"
#include "oracles.hpp"

using namespace abstrip;
using oracle::Rational;

namespace {

// Recomputes a named expected value from the scenario alone.
std::optional<double> recompute(const NamedScenario& named, const std::string& name) {
    const auto s = named.source.instantiate<Rational>();
    const auto m = derive_moments(s);
    const Rational d_inf = exact_decimal<Rational>(std::to_string(named.d_inf));
    const auto md = derive_moments(named.scenario);
    if (name == "p0") return m.p0.convert_to<double>();
    if (name == "p1") return m.p1.convert_to<double>();
    if (name == "p_theta") return m.p_theta.convert_to<double>();
    if (name == "m_eta") return m.m_eta.convert_to<double>();
    if (name == "d2") return drift(m, s.p, d_inf).first.convert_to<double>();
    if (name == "d3") return drift(m, s.p, d_inf).second.convert_to<double>();
    if (name == "marginal_mean0") return marginal_conv_rate_limit(m, 0, d_inf).first.convert_to<double>();
    if (name == "marginal_mean1") return marginal_conv_rate_limit(m, 1, d_inf).first.convert_to<double>();
    if (name == "l0_rate") return slln_limits(m, s.p, Rational(0)).l0_rate.convert_to<double>();
    if (name == "l1_rate") return slln_limits(m, s.p, Rational(0)).l1_rate.convert_to<double>();
    if (name == "c0_separate") return slln_limits(m, s.p, Rational(0)).c0.convert_to<double>();
    if (name == "c1_separate") return slln_limits(m, s.p, Rational(0)).c1.convert_to<double>();
    if (name == "tau1_over_c") return Rational(1 / m.m_eta).convert_to<double>();
    if (name == "delta") return noncentrality(md, named.scenario.p, named.d_inf);
    if (name == "asym_reject_prob")
        return asym_reject_prob(noncentrality(md, named.scenario.p, named.d_inf), named.alpha);
    if (name == "asym_power") return asym_power_mc(md, named.scenario.p, named.d_inf, named.alpha, 2'000'000, 42).estimate;
    return std::nullopt;
}

}  // namespace

TEST(Scenarios, Ids) {
    const auto ids = scenario_ids();
    for (const char* id : {"ranking", "ranking-separate", "picky"})
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
}

TEST(Scenarios, UnknownIdListsKnown) {
    try {
        get_scenario("nope");
        FAIL() << "no exception";
    } catch (const UnknownScenario& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("nope"), std::string::npos);
        EXPECT_NE(what.find("ranking"), std::string::npos);
        EXPECT_NE(what.find("picky"), std::string::npos);
    }
}

TEST(Scenarios, ExpectedValuesRecompute) {
    for (const auto& id : scenario_ids()) {
        const auto& named = get_scenario(id);
        for (const auto& e : named.expected) {
            const auto value = recompute(named, e.name);
            ASSERT_TRUE(value) << id << "." << e.name << " has no recomputation";
            EXPECT_NEAR(*value, e.value, e.tolerance) << id << "." << e.name << " (" << e.note << ")";
        }
    }
}

TEST(Scenarios, StoredAtomsAreTheSourceDecimals) {
    for (const auto& id : scenario_ids()) {
        const auto& named = get_scenario(id);
        EXPECT_EQ(named.source.instantiate<double>().mu0.atoms.size(), named.scenario.mu0.atoms.size());
        // Exact rational sums are exactly one.
        const auto exact = named.source.instantiate<Rational>();
        for (const auto* d : {&exact.mu0, &exact.mu1, &exact.nu}) {
            Rational total = 0;
            for (const auto& a : d->atoms) total += a.prob;
            EXPECT_EQ(total, Rational(1)) << id;
        }
    }
}

// The picky laws are 0.99 times the ranking laws plus 0.01 (delta_00 + delta_01)/2.
TEST(Scenarios, PickyIsTheMixture) {
    const auto ranking = get_scenario("ranking").source.instantiate<Rational>();
    const auto picky = get_scenario("picky").source.instantiate<Rational>();
    const Rational keep(99, 100), picky_half(1, 200);
    for (int arm = 0; arm < 2; ++arm) {
        const auto& r = arm ? ranking.mu1 : ranking.mu0;
        const auto& p = arm ? picky.mu1 : picky.mu0;
        ASSERT_EQ(r.atoms.size(), p.atoms.size());
        for (std::size_t i = 0; i < r.atoms.size(); ++i) {
            Rational expected = keep * r.atoms[i].prob;
            if (r.atoms[i].x == 0) expected += picky_half;
            EXPECT_EQ(p.atoms[i].prob, expected);
        }
    }
    for (std::size_t i = 0; i < ranking.nu.atoms.size(); ++i) {
        Rational expected = keep * ranking.nu.atoms[i].prob;
        if (ranking.nu.atoms[i].x == 0) expected += 2 * picky_half;
        EXPECT_EQ(picky.nu.atoms[i].prob, expected);
    }
}

TEST(ScenarioIo, YamlRoundTrip) {
    for (const auto& id : scenario_ids()) {
        const auto& s = get_scenario(id).scenario;
        const auto back = parse_scenario(to_yaml(s, id));
        EXPECT_EQ(back.id, id);
        EXPECT_EQ(to_yaml(back.scenario, id), to_yaml(s, id));
        ASSERT_EQ(back.scenario.mu1.atoms.size(), s.mu1.atoms.size());
        for (std::size_t i = 0; i < s.mu1.atoms.size(); ++i) EXPECT_EQ(back.scenario.mu1.atoms[i].prob, s.mu1.atoms[i].prob);
    }
}

TEST(ScenarioIo, JsonRoundTrip) {
    const auto& s = get_scenario("picky").scenario;
    const auto back = parse_scenario(to_json(s, "picky"));
    EXPECT_EQ(back.id, "picky");
    EXPECT_EQ(to_json(back.scenario, "picky"), to_json(s, "picky"));
}

TEST(ScenarioIo, HandWrittenYaml) {
    const auto f = parse_scenario(R"(
p: 0.5
q: 1
schedule: {d: 0.5, rho: 0.5}
mu0:
  atoms:
    - {x: 0, y: 0, prob: 0.9}
    - {x: 1, y: 0, prob: 0.1}
mu1:
  atoms: [{x: 0, y: 0, prob: 0.5}, {x: 0, y: 1, prob: 0.5}]
nu:
  atoms: [{x: 0, prob: 1}]
)");
    EXPECT_TRUE(f.id.empty());
    EXPECT_EQ(f.scenario.mu1.atoms[1].y, 1);
    EXPECT_EQ(f.scenario.nu.atoms[0].y, 0);
    EXPECT_TRUE(validate_scenario(f.scenario).empty());
}

TEST(ScenarioIo, Malformed) {
    EXPECT_THROW(parse_scenario("p: [1, 2"), ScenarioParseError);
    EXPECT_THROW(parse_scenario("p: 0.5\nq: 1\n"), ScenarioParseError);
    EXPECT_THROW(parse_scenario("- 1\n- 2\n"), ScenarioParseError);
    EXPECT_THROW(parse_scenario("{\"p\": 0.5"), ScenarioParseError);
    EXPECT_THROW(parse_scenario("{\"p\": \"half\", \"q\": 1}"), ScenarioParseError);
    auto text = to_yaml(get_scenario("ranking").scenario, "x");
    text.replace(text.find("prob: 0.948"), 11, "prob: lots");
    EXPECT_THROW(parse_scenario(text), ScenarioParseError);
}

TEST(ScenarioIo, FileIdDefaultsToStem) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "abstrip_stem_test.yaml";
    {
        std::ofstream out(path);
        out << to_yaml(get_scenario("ranking").scenario, "");
    }
    EXPECT_EQ(load_scenario_file(path).id, "abstrip_stem_test");
    std::filesystem::remove(path);
    EXPECT_THROW(load_scenario_file(path), std::runtime_error);
}

TEST(ScenarioIo, ShortestDecimal) {
    EXPECT_EQ(shortest_decimal(0.948), "0.948");
    EXPECT_EQ(shortest_decimal(1.0), "1");
    EXPECT_EQ(std::stod(shortest_decimal(0.1 + 0.2)), 0.1 + 0.2);
}
