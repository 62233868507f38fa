#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abstrip/model.hpp"
#include "abstrip/simulate.hpp"

namespace abstrip {

enum class Mode { shared, separate };

struct BatchConfig {
    std::int64_t n = 0;
    std::int64_t replicates = 1;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    Engine engine = Engine::fast_aggregate;
    Mode mode = Mode::shared;
    std::optional<std::int64_t> inventory;  ///< overrides the schedule's c_n
    int threads = 0;                        ///< <= 0: default_threads()
    std::string scenario_id;
};

/// One CSV row. Separate mode emits two rows per replicate, arm 0 first.
struct ReplicateRow {
    std::int64_t replicate = 0;
    SimRecord record;
    bool reject = false;
};

struct FieldStats {
    std::int64_t count = 0;  ///< records where the field is defined
    double mean = 0.0;
    std::optional<double> variance;  ///< sample variance; needs count >= 2
    std::optional<double> ci95;      ///< normal-approximation half-width of the mean
};

struct BatchSummary {
    std::string scenario_id;
    Mode mode = Mode::shared;
    std::int64_t n = 0;
    std::int64_t c_n = 0;
    double alpha = 0.05;
    std::int64_t replicates = 0;
    double reject_rate = 0.0;
    std::optional<double> reject_ci95;
    double undefined_rate = 0.0;
    std::map<std::string, FieldStats> fields;  ///< N0, N1, L0, L1, g1_0, ..., tau1, tau2, chi2, p_value
    std::vector<std::string> warnings;
};

/// Replicate r runs with seed derive_seed(config.seed, r); rows come back in
/// replicate order whatever the thread count.
std::vector<ReplicateRow> run_batch(const Scenario& s, const BatchConfig& config);

/// Statistics of a set of rows; the result does not depend on row order.
/// Throws std::invalid_argument on an empty set or on rows with different n or c_n.
BatchSummary summarize(std::vector<ReplicateRow> rows, double alpha, Mode mode, const std::string& scenario_id = {});

struct TheoryPrediction {
    std::int64_t n = 0;
    std::int64_t c_n = 0;
    double alpha = 0.05;
    double p = 0.5;
    std::optional<double> delta;             ///< with d_inf = c_n / sqrt(n)
    std::optional<double> asym_reject_prob;
    std::optional<double> l0_rate, l1_rate;  ///< strong-law rates with c_inf = c_n / n
    std::optional<double> tau1_over_c;       ///< 1 / m^eta
};

TheoryPrediction predict(const Scenario& s, std::int64_t n, std::int64_t c_n, double alpha);

/// z = (empirical - predicted) / SE for reject_rate, l0_rate, l1_rate and
/// tau1_over_c. Quantities without a prediction or without enough data are
/// left out. Throws std::invalid_argument for a summary with no replicates, a
/// separate-mode summary, or mismatched n, c_n or alpha.
std::map<std::string, double> compare_to_theory(const BatchSummary& summary, const TheoryPrediction& prediction);

/// Header: replicate,seed,n,c_n,N0,N1,L0,L1,g1_0,g1_1,g2_0,g2_1,tau1,tau2,chi2,p_value,reject
void write_csv(std::ostream& out, const std::vector<ReplicateRow>& rows);

/// Inverse of write_csv. Throws std::runtime_error on malformed input.
std::vector<ReplicateRow> read_csv(std::istream& in);

std::string summary_json(const BatchSummary& summary, const std::optional<TheoryPrediction>& prediction = std::nullopt);

}  // namespace abstrip
