#include "abstrip/mcharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "abstrip/asymptotics.hpp"
#include "abstrip/parallel.hpp"
#include "abstrip/rng.hpp"
#include "abstrip/stattest.hpp"

namespace abstrip {

namespace {

constexpr double kZ95 = 1.959963984540054;

const char* const kCsvHeader = "replicate,seed,n,c_n,N0,N1,L0,L1,g1_0,g1_1,g2_0,g2_1,tau1,tau2,chi2,p_value,reject";

struct Field {
    const char* name;
    std::function<std::optional<double>(const SimRecord&)> get;
};

template <typename T>
std::optional<double> as_double(const std::optional<T>& v) {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        {"N0", [](const SimRecord& r) { return std::optional<double>(r.n0); }},
        {"N1", [](const SimRecord& r) { return std::optional<double>(r.n1); }},
        {"L0", [](const SimRecord& r) { return std::optional<double>(r.l0); }},
        {"L1", [](const SimRecord& r) { return std::optional<double>(r.l1); }},
        {"g1_0", [](const SimRecord& r) { return std::optional<double>(r.g1_0); }},
        {"g1_1", [](const SimRecord& r) { return std::optional<double>(r.g1_1); }},
        {"g2_0", [](const SimRecord& r) { return std::optional<double>(r.g2_0); }},
        {"g2_1", [](const SimRecord& r) { return std::optional<double>(r.g2_1); }},
        {"tau1", [](const SimRecord& r) { return as_double(r.tau1); }},
        {"tau2", [](const SimRecord& r) { return as_double(r.tau2); }},
        {"chi2", [](const SimRecord& r) { return r.chi2; }},
        {"p_value", [](const SimRecord& r) { return r.p_value; }},
    };
    return all;
}

FieldStats field_stats(const std::vector<double>& values) {
    FieldStats f;
    f.count = static_cast<std::int64_t>(values.size());
    if (values.empty()) return f;
    double sum = 0.0;
    for (double v : values) sum += v;
    f.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - f.mean) * (v - f.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        f.variance = var;
        f.ci95 = kZ95 * std::sqrt(var / static_cast<double>(values.size()));
    }
    return f;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + text + "'");
    return v;
}

template <typename T>
std::optional<T> parse_optional(const std::string& text, std::size_t line_no) {
    if (text.empty()) return std::nullopt;
    return parse_number<T>(text, line_no);
}

}  // namespace

std::vector<ReplicateRow> run_batch(const Scenario& s, const BatchConfig& config) {
    if (config.replicates < 1) throw std::invalid_argument("run_batch: replicates must be >= 1");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("run_batch: alpha must be in (0, 1)");
    const StripWalk walk(s);
    const double q = chi2_1df_quantile(1.0 - config.alpha);
    const std::int64_t per = config.mode == Mode::shared ? 1 : 2;
    std::vector<ReplicateRow> rows(static_cast<std::size_t>(config.replicates * per));
    parallel_for(config.replicates, config.threads, [&](std::int64_t r) {
        const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
        auto slot = rows.begin() + r * per;
        if (config.mode == Mode::shared) {
            slot->record = walk.run(config.n, seed, config.engine, config.inventory);
        } else {
            slot->record = walk.run_single_arm(0, config.n, derive_seed(seed, 0), config.engine, config.inventory);
            (slot + 1)->record =
                walk.run_single_arm(1, config.n, derive_seed(seed, 1), config.engine, config.inventory);
        }
        for (std::int64_t k = 0; k < per; ++k) {
            slot[k].replicate = r;
            slot[k].reject = rejects(slot[k].record.chi2, q);
        }
    });
    return rows;
}

BatchSummary summarize(std::vector<ReplicateRow> rows, double alpha, Mode mode, const std::string& scenario_id) {
    if (rows.empty()) throw std::invalid_argument("summarize: no records");
    std::sort(rows.begin(), rows.end(), [](const ReplicateRow& a, const ReplicateRow& b) {
        if (a.replicate != b.replicate) return a.replicate < b.replicate;
        return a.record.seed < b.record.seed;
    });
    BatchSummary out;
    out.scenario_id = scenario_id;
    out.mode = mode;
    out.alpha = alpha;
    out.n = rows.front().record.n;
    out.c_n = rows.front().record.c_n;
    for (const auto& row : rows)
        if (row.record.n != out.n || row.record.c_n != out.c_n)
            throw std::invalid_argument("summarize: records differ in n or c_n");

    std::int64_t distinct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (i == 0 || rows[i].replicate != rows[i - 1].replicate) ++distinct;
    out.replicates = distinct;

    const double q = chi2_1df_quantile(1.0 - alpha);
    std::int64_t rejected = 0, undefined = 0;
    for (const auto& row : rows) {
        if (!row.record.chi2) ++undefined;
        if (rejects(row.record.chi2, q)) ++rejected;
    }
    const auto total = static_cast<double>(rows.size());
    out.reject_rate = static_cast<double>(rejected) / total;
    out.undefined_rate = static_cast<double>(undefined) / total;
    if (rows.size() >= 2) out.reject_ci95 = kZ95 * std::sqrt(out.reject_rate * (1.0 - out.reject_rate) / total);

    for (const auto& f : fields()) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& row : rows)
            if (auto v = f.get(row.record)) values.push_back(*v);
        out.fields[f.name] = field_stats(values);
    }
    if (out.replicates < 30)
        out.warnings.push_back("fewer than 30 replicates: normal-approximation intervals are unreliable");
    return out;
}

TheoryPrediction predict(const Scenario& s, std::int64_t n, std::int64_t c_n, double alpha) {
    if (n < 1) throw std::invalid_argument("predict: n must be >= 1");
    require_valid(s);
    const auto m = derive_moments(s);
    TheoryPrediction t;
    t.n = n;
    t.c_n = c_n;
    t.alpha = alpha;
    t.p = s.p;
    const double nn = static_cast<double>(n);
    try {
        t.delta = noncentrality(m, s.p, static_cast<double>(c_n) / std::sqrt(nn));
        t.asym_reject_prob = asym_reject_prob(*t.delta, alpha);
    } catch (const std::domain_error&) {
    }
    try {
        const auto limits = slln_limits(m, s.p, static_cast<double>(c_n) / nn);
        t.l0_rate = limits.l0_rate;
        t.l1_rate = limits.l1_rate;
    } catch (const std::domain_error&) {
    }
    if (m.m_eta > 0.0 && c_n > 0) t.tau1_over_c = 1.0 / m.m_eta;
    return t;
}

std::map<std::string, double> compare_to_theory(const BatchSummary& summary, const TheoryPrediction& prediction) {
    if (summary.replicates < 1) throw std::invalid_argument("compare_to_theory: summary has no replicates");
    if (summary.mode != Mode::shared)
        throw std::invalid_argument("compare_to_theory: only shared-inventory batches have a prediction");
    if (summary.n != prediction.n || summary.c_n != prediction.c_n || summary.alpha != prediction.alpha)
        throw std::invalid_argument("compare_to_theory: summary and prediction disagree on n, c_n or alpha");

    std::map<std::string, double> z;
    const auto reps = static_cast<double>(summary.replicates);
    if (prediction.asym_reject_prob) {
        const double p = *prediction.asym_reject_prob;
        const double se = std::sqrt(p * (1.0 - p) / reps);
        if (se > 0.0) z["reject_rate"] = (summary.reject_rate - p) / se;
    }
    auto mean_z = [&](const char* name, const char* field, std::optional<double> predicted, double scale) {
        if (!predicted) return;
        const auto it = summary.fields.find(field);
        if (it == summary.fields.end() || !it->second.variance || *it->second.variance <= 0.0) return;
        const double se = std::sqrt(*it->second.variance / static_cast<double>(it->second.count)) / scale;
        z[name] = (it->second.mean / scale - *predicted) / se;
    };
    const double nn = static_cast<double>(summary.n);
    mean_z("l0_rate", "L0", prediction.l0_rate, nn);
    mean_z("l1_rate", "L1", prediction.l1_rate, nn);
    if (summary.c_n > 0) mean_z("tau1_over_c", "tau1", prediction.tau1_over_c, static_cast<double>(summary.c_n));
    return z;
}

void write_csv(std::ostream& out, const std::vector<ReplicateRow>& rows) {
    out << kCsvHeader << '\n';
    auto opt_int = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
    auto opt_real = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& row : rows) {
        const auto& r = row.record;
        out << row.replicate << ',' << r.seed << ',' << r.n << ',' << r.c_n << ',' << r.n0 << ',' << r.n1 << ','
            << r.l0 << ',' << r.l1 << ',' << r.g1_0 << ',' << r.g1_1 << ',' << r.g2_0 << ',' << r.g2_1 << ','
            << opt_int(r.tau1) << ',' << opt_int(r.tau2) << ',' << opt_real(r.chi2) << ',' << opt_real(r.p_value)
            << ',' << (row.reject ? 1 : 0) << '\n';
    }
}

std::vector<ReplicateRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("CSV header missing or unexpected");
    std::vector<ReplicateRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 17)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 17 fields");
        ReplicateRow row;
        auto& r = row.record;
        row.replicate = parse_number<std::int64_t>(cells[0], line_no);
        r.seed = parse_number<std::uint64_t>(cells[1], line_no);
        std::int64_t* ints[] = {&r.n, &r.c_n, &r.n0, &r.n1, &r.l0, &r.l1, &r.g1_0, &r.g1_1, &r.g2_0, &r.g2_1};
        for (std::size_t i = 0; i < 10; ++i) *ints[i] = parse_number<std::int64_t>(cells[i + 2], line_no);
        r.tau1 = parse_optional<std::int64_t>(cells[12], line_no);
        r.tau2 = parse_optional<std::int64_t>(cells[13], line_no);
        r.chi2 = parse_optional<double>(cells[14], line_no);
        r.p_value = parse_optional<double>(cells[15], line_no);
        const auto reject = parse_number<int>(cells[16], line_no);
        if (reject != 0 && reject != 1) throw std::runtime_error("line " + std::to_string(line_no) + ": bad reject flag");
        row.reject = reject == 1;
        rows.push_back(row);
    }
    return rows;
}

std::string summary_json(const BatchSummary& summary, const std::optional<TheoryPrediction>& prediction) {
    using nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j;
    j["scenario_id"] = summary.scenario_id;
    j["mode"] = summary.mode == Mode::shared ? "shared" : "separate";
    j["n"] = summary.n;
    j["c_n"] = summary.c_n;
    j["alpha"] = summary.alpha;
    j["replicates"] = summary.replicates;
    j["reject_rate"] = summary.reject_rate;
    j["reject_ci95"] = opt(summary.reject_ci95);
    j["undefined_rate"] = summary.undefined_rate;
    ordered_json means = ordered_json::object(), variances = ordered_json::object(), ci = ordered_json::object();
    for (const auto& f : fields()) {
        const auto& st = summary.fields.at(f.name);
        means[f.name] = st.count > 0 ? ordered_json(st.mean) : ordered_json(nullptr);
        variances[f.name] = opt(st.variance);
        ci[f.name] = opt(st.ci95);
    }
    j["means"] = means;
    j["variances"] = variances;
    j["ci95"] = ci;
    ordered_json theory = ordered_json::object(), zs = ordered_json::object();
    if (prediction) {
        theory["delta"] = opt(prediction->delta);
        theory["asym_reject_prob"] = opt(prediction->asym_reject_prob);
        if (summary.mode == Mode::shared && summary.replicates > 0)
            for (const auto& [k, v] : compare_to_theory(summary, *prediction)) zs[k] = v;
    }
    j["theory"] = theory;
    j["z_scores"] = zs;
    j["warnings"] = summary.warnings;
    return j.dump(2) + "\n";
}

}  // namespace abstrip
