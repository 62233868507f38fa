#include "abstrip/simulate.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "abstrip/stattest.hpp"

namespace abstrip {

namespace {

// Interior stretches shorter than this are stepped; longer ones are drawn in
// aggregate. Purely a speed knob, the law of the record does not depend on it.
constexpr std::int64_t kMinAggregate = 64;

struct Tally {
    std::int64_t visitors[2] = {0, 0};
    std::int64_t buyers[2] = {0, 0};
    std::int64_t good1[2] = {0, 0};
    std::int64_t good2[2] = {0, 0};
};

std::int64_t draw_binomial(Rng& rng, std::int64_t trials, double prob) {
    if (trials <= 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, prob);
    return dist(rng);
}

}  // namespace

StripWalk::Law StripWalk::make_law(const OfferDistribution& d) {
    Law law;
    for (const auto& a : d.atoms) {
        law.x.push_back(a.x);
        law.y.push_back(a.y);
        law.prob.push_back(a.prob);
    }
    law.table = AliasTable(law.prob);
    return law;
}

StripWalk::StripWalk(const Scenario& s) : scenario_(s) {
    require_valid(s);
    arm_law_[0] = make_law(s.mu0);
    arm_law_[1] = make_law(s.mu1);
    boundary_law_ = make_law(s.nu);
    for (const auto* law : {&arm_law_[0], &arm_law_[1]})
        for (std::size_t j = 0; j < law->y.size(); ++j)
            if (law->prob[j] > 0.0) max_eta_ = std::max(max_eta_, law->y[j]);
}

SimRecord StripWalk::simulate(double arm1_prob, std::int64_t n, std::int64_t c_n, std::uint64_t seed,
                              Engine engine, Trajectory* trace) const {
    if (n < 1) throw std::invalid_argument("simulation needs at least one visitor");
    if (c_n < 0) throw std::invalid_argument("inventory must be non-negative");

    Rng rng(seed);
    Tally tally;
    SimRecord rec;
    rec.n = n;
    rec.c_n = c_n;
    rec.seed = seed;
    if (trace) {
        trace->clear();
        trace->reserve(static_cast<std::size_t>(n));
    }

    const double q = scenario_.q;
    std::int64_t s = 0, t = 0, k = 0;
    if (c_n == 0) rec.tau1 = rec.tau2 = 0;  // starts on the boundary

    // Adds `count` draws from `law` for `arm` to the tally and the walk.
    auto add_multinomial = [&](const Law& law, int arm, std::int64_t count, bool moves_t) {
        tally.visitors[arm] += count;
        double remaining_mass = 1.0;
        std::int64_t remaining = count;
        const std::size_t last = law.prob.size() - 1;
        for (std::size_t j = 0; j <= last && remaining > 0; ++j) {
            std::int64_t c;
            if (j == last) {
                c = remaining;
            } else {
                const double ratio = remaining_mass > 0.0 ? law.prob[j] / remaining_mass : 1.0;
                c = draw_binomial(rng, remaining, std::clamp(ratio, 0.0, 1.0));
            }
            remaining -= c;
            remaining_mass -= law.prob[j];
            if (c == 0) continue;
            if (law.x[j] + law.y[j] > 0) tally.buyers[arm] += c;
            tally.good1[arm] += law.x[j] * c;
            s += law.x[j] * c;
            if (moves_t) {
                tally.good2[arm] += law.y[j] * c;
                t += law.y[j] * c;
            }
        }
    };

    auto step = [&]() {
        const int arm = rng.bernoulli(arm1_prob) ? 1 : 0;
        ++k;
        Step st;
        st.arm = static_cast<std::uint8_t>(arm);
        std::int64_t bought_x, bought_y = 0;
        if (t < c_n) {
            st.phase = Phase::interior;
            const Law& law = arm_law_[arm];
            const std::size_t j = law.table.sample(rng);
            const std::int64_t xi = law.x[j], eta = law.y[j];
            st.offer_x = xi;
            st.offer_y = eta;
            if (!rec.tau1 && t + eta >= c_n) rec.tau1 = k;
            if (t + eta <= c_n) {
                bought_x = xi;
                bought_y = eta;
            } else if (rng.bernoulli(q)) {
                bought_x = xi;
                bought_y = c_n - t;
            } else {
                bought_x = 0;
            }
            s += bought_x;
            t += bought_y;
            if (t == c_n) rec.tau2 = k;
        } else {
            st.phase = Phase::boundary;
            const std::size_t j = boundary_law_.table.sample(rng);
            bought_x = boundary_law_.x[j];
            st.offer_x = bought_x;
            s += bought_x;
        }
        tally.visitors[arm] += 1;
        if (bought_x + bought_y > 0) tally.buyers[arm] += 1;
        tally.good1[arm] += bought_x;
        tally.good2[arm] += bought_y;
        if (trace) {
            st.x = bought_x;
            st.y = bought_y;
            st.s = s;
            st.t = t;
            trace->push_back(st);
        }
    };

    if (engine == Engine::exact_steps || trace) {
        while (k < n) step();
    } else {
        while (k < n && t < c_n) {
            // No attempted step inside a stretch of `span` visitors can reach
            // c_n, so the stretch is i.i.d. and tau1 lies beyond it.
            const std::int64_t gap = c_n - t;
            const std::int64_t span =
                max_eta_ == 0 ? n - k : std::min(n - k, (gap - 1) / max_eta_);
            if (span < kMinAggregate) {
                step();
                continue;
            }
            const std::int64_t arm1 = draw_binomial(rng, span, arm1_prob);
            add_multinomial(arm_law_[0], 0, span - arm1, true);
            add_multinomial(arm_law_[1], 1, arm1, true);
            k += span;
        }
        if (k < n) {
            const std::int64_t rest = n - k;
            const std::int64_t arm1 = draw_binomial(rng, rest, arm1_prob);
            add_multinomial(boundary_law_, 0, rest - arm1, false);
            add_multinomial(boundary_law_, 1, arm1, false);
            k = n;
        }
    }

    rec.n0 = tally.visitors[0];
    rec.n1 = tally.visitors[1];
    rec.l0 = tally.buyers[0];
    rec.l1 = tally.buyers[1];
    rec.g1_0 = tally.good1[0];
    rec.g1_1 = tally.good1[1];
    rec.g2_0 = tally.good2[0];
    rec.g2_1 = tally.good2[1];
    rec.chi2 = chi2_statistic({rec.l0, rec.l1, rec.n0, rec.n1});
    rec.p_value = chi2_p_value(rec.chi2);
    return rec;
}

SimRecord StripWalk::run(std::int64_t n, std::uint64_t seed, Engine engine,
                         std::optional<std::int64_t> inventory) const {
    const auto c_n = inventory.value_or(scenario_.schedule.inventory(n));
    return simulate(scenario_.p, n, c_n, seed, engine, nullptr);
}

SimRecord StripWalk::run_single_arm(int arm, std::int64_t n, std::uint64_t seed, Engine engine,
                                    std::optional<std::int64_t> inventory) const {
    if (arm != 0 && arm != 1) throw std::invalid_argument("arm must be 0 or 1");
    const auto c_n = inventory.value_or(scenario_.schedule.inventory(n));
    return simulate(arm == 1 ? 1.0 : 0.0, n, c_n, seed, engine, nullptr);
}

std::pair<SimRecord, Trajectory> StripWalk::run_traced(std::int64_t n, std::uint64_t seed,
                                                       std::optional<std::int64_t> inventory) const {
    const auto c_n = inventory.value_or(scenario_.schedule.inventory(n));
    Trajectory path;
    auto rec = simulate(scenario_.p, n, c_n, seed, Engine::exact_steps, &path);
    return {rec, std::move(path)};
}

SimRecord run_shared(const Scenario& s, std::int64_t n, std::uint64_t seed, Engine engine,
                     std::optional<std::int64_t> inventory) {
    return StripWalk(s).run(n, seed, engine, inventory);
}

std::pair<SimRecord, SimRecord> run_separate(const Scenario& s, std::int64_t n, std::uint64_t seed,
                                             Engine engine, std::optional<std::int64_t> inventory) {
    const StripWalk walk(s);
    return {walk.run_single_arm(0, n, derive_seed(seed, 0), engine, inventory),
            walk.run_single_arm(1, n, derive_seed(seed, 1), engine, inventory)};
}

std::pair<std::int64_t, std::int64_t> purchases_by_segment(const SimRecord& r, const Trajectory& path) {
    if (static_cast<std::int64_t>(path.size()) != r.n)
        throw std::invalid_argument("trajectory length does not match the record");
    std::int64_t bought[2] = {0, 0};
    const std::int64_t first = r.tau1.value_or(r.n + 1);
    const std::int64_t second = r.tau2.value_or(r.n);
    for (std::int64_t k = 1; k <= r.n; ++k) {
        const Step& st = path[static_cast<std::size_t>(k - 1)];
        bool purchase;
        if (k < first)
            purchase = st.offer_x + st.offer_y > 0;
        else if (k <= second)
            purchase = st.x + st.y > 0;
        else
            purchase = st.offer_x > 0;
        if (purchase) ++bought[st.arm];
    }
    return {bought[0], bought[1]};
}

}  // namespace abstrip
