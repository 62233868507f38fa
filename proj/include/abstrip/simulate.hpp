#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "abstrip/alias_table.hpp"
#include "abstrip/model.hpp"
#include "abstrip/rng.hpp"

namespace abstrip {

enum class Engine {
    exact_steps,     ///< one iteration per visitor
    fast_aggregate,  ///< i.i.d. stretches drawn from their exact joint law
};

enum class Phase : std::uint8_t { interior, boundary };

/// Outcome of one replicate. Unreached stopping times and an undefined
/// statistic are empty optionals.
struct SimRecord {
    std::int64_t n = 0;
    std::int64_t c_n = 0;
    std::int64_t n0 = 0, n1 = 0;      ///< visitors per arm
    std::int64_t l0 = 0, l1 = 0;      ///< visitors per arm who bought anything
    std::int64_t g1_0 = 0, g1_1 = 0;  ///< units of good 1 sold per arm
    std::int64_t g2_0 = 0, g2_1 = 0;  ///< units of good 2 sold per arm
    std::optional<std::int64_t> tau1, tau2;
    std::optional<double> chi2;
    std::optional<double> p_value;
    std::uint64_t seed = 0;

    friend bool operator==(const SimRecord&, const SimRecord&) = default;
};

/// One visitor of a traced exact-steps run.
struct Step {
    std::uint8_t arm = 0;
    Phase phase = Phase::interior;  ///< phase before the step
    std::int64_t offer_x = 0;       ///< attempted xi (interior) or theta (boundary)
    std::int64_t offer_y = 0;       ///< attempted eta; 0 on the boundary
    std::int64_t x = 0;             ///< good-1 units actually bought
    std::int64_t y = 0;             ///< good-2 units actually bought
    std::int64_t s = 0;             ///< S after the step
    std::int64_t t = 0;             ///< T after the step
};

using Trajectory = std::vector<Step>;

/// Walk in the strip N0 x [0, c_n] with alias tables prepared once for a
/// scenario. Thread-safe for concurrent run() calls.
class StripWalk {
public:
    /// Validates the scenario.
    explicit StripWalk(const Scenario& s);

    /// Shared-inventory run with c_n taken from the scenario's schedule unless
    /// `inventory` overrides it.
    SimRecord run(std::int64_t n, std::uint64_t seed, Engine engine,
                  std::optional<std::int64_t> inventory = std::nullopt) const;

    /// Run under P_arm: every visitor is shown `arm` (0 or 1).
    SimRecord run_single_arm(int arm, std::int64_t n, std::uint64_t seed, Engine engine,
                             std::optional<std::int64_t> inventory = std::nullopt) const;

    /// Exact-steps run that also returns the per-visitor path.
    std::pair<SimRecord, Trajectory> run_traced(std::int64_t n, std::uint64_t seed,
                                                std::optional<std::int64_t> inventory = std::nullopt) const;

    const Scenario& scenario() const noexcept { return scenario_; }

private:
    struct Law {
        AliasTable table;
        std::vector<std::int64_t> x, y;
        std::vector<double> prob;
    };

    SimRecord simulate(double arm1_prob, std::int64_t n, std::int64_t c_n, std::uint64_t seed,
                       Engine engine, Trajectory* trace) const;

    static Law make_law(const OfferDistribution& d);

    Scenario scenario_;
    Law arm_law_[2];
    Law boundary_law_;
    std::int64_t max_eta_ = 0;
};

/// Shared-inventory A/B run of (A5). Throws on n < 1 or an invalid scenario.
SimRecord run_shared(const Scenario& s, std::int64_t n, std::uint64_t seed, Engine engine,
                     std::optional<std::int64_t> inventory = std::nullopt);

/// Two independent single-arm runs on separate inventories: first under P0
/// with seed derive_seed(seed, 0), then under P1 with derive_seed(seed, 1).
std::pair<SimRecord, SimRecord> run_separate(const Scenario& s, std::int64_t n, std::uint64_t seed,
                                             Engine engine,
                                             std::optional<std::int64_t> inventory = std::nullopt);

/// (tau1, tau2) of a record.
inline std::pair<std::optional<std::int64_t>, std::optional<std::int64_t>> stopping_times(
    const SimRecord& r) {
    return {r.tau1, r.tau2};
}

/// Purchases per arm recomputed from a trace as the sum over [1, tau1),
/// [tau1, tau2] and (tau2, n], using the attempted offers before tau1 and the
/// boundary draws after tau2.
std::pair<std::int64_t, std::int64_t> purchases_by_segment(const SimRecord& r, const Trajectory& path);

}  // namespace abstrip
