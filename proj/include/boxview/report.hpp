#pragma once

// Run records, suite files, ratio summaries and the benchmark protocol.
// Requires nlohmann/json.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "boxview/models.hpp"

namespace boxview {

using json = nlohmann::ordered_json;

enum class RunStatus { Sat, Unsat, Optimal, Timeout, Error };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Sat: return "sat";
        case RunStatus::Unsat: return "unsat";
        case RunStatus::Optimal: return "optimal";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::Error: return "error";
    }
    return "?";
}

inline RunStatus parse_run_status(const std::string& s) {
    for (RunStatus r : {RunStatus::Sat, RunStatus::Unsat, RunStatus::Optimal, RunStatus::Timeout, RunStatus::Error})
        if (s == to_string(r)) return r;
    throw std::invalid_argument("boxview: unknown status '" + s + "'");
}

struct RunRecord {
    std::string problem;
    std::string instance;
    std::string variant;
    RunStatus status = RunStatus::Sat;
    SearchStats stats;
    std::optional<Int> objective;
    std::string error;  // set for per-row failures in bench
};

inline constexpr const char* kRecordFields[] = {"problem",        "instance",    "variant",   "status",
                                                "time_ms",        "propagations", "fails",     "domain_updates",
                                                "view_calls",     "arith_ops",   "solutions", "objective"};

inline json to_json(const RunRecord& r) {
    json j = json::object();
    j["problem"] = r.problem;
    j["instance"] = r.instance;
    j["variant"] = r.variant;
    j["status"] = to_string(r.status);
    j["time_ms"] = r.stats.time_ms;
    j["propagations"] = r.stats.propagations;
    j["fails"] = r.stats.fails;
    j["domain_updates"] = r.stats.domain_updates;
    j["view_calls"] = r.stats.view_calls;
    j["arith_ops"] = r.stats.arith_ops;
    j["solutions"] = r.stats.solutions;
    j["objective"] = r.objective ? json(*r.objective) : json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

/// Checks the published record schema: every field present with the right
/// type, counters non-negative.
inline bool valid_record(const json& j, std::string* why = nullptr) {
    auto bad = [&](const std::string& w) {
        if (why) *why = w;
        return false;
    };
    if (!j.is_object()) return bad("not an object");
    for (const char* f : kRecordFields)
        if (!j.contains(f)) return bad(std::string("missing ") + f);
    for (const char* f : {"problem", "instance", "variant", "status"})
        if (!j[f].is_string()) return bad(std::string(f) + " is not a string");
    try {
        parse_run_status(j["status"].get<std::string>());
    } catch (const std::exception& e) {
        return bad(e.what());
    }
    if (!j["time_ms"].is_number() || j["time_ms"].get<double>() < 0) return bad("time_ms");
    for (const char* f : {"propagations", "fails", "domain_updates", "view_calls", "arith_ops", "solutions"})
        if (!j[f].is_number_unsigned()) return bad(std::string(f) + " is not a non-negative integer");
    if (!j["objective"].is_null() && !j["objective"].is_number_integer()) return bad("objective");
    return true;
}

inline RunRecord record_from_json(const json& j) {
    std::string why;
    if (!valid_record(j, &why)) throw std::invalid_argument("boxview: invalid record: " + why);
    RunRecord r;
    r.problem = j["problem"];
    r.instance = j["instance"];
    r.variant = j["variant"];
    r.status = parse_run_status(j["status"]);
    r.stats.time_ms = j["time_ms"];
    r.stats.propagations = j["propagations"];
    r.stats.fails = j["fails"];
    r.stats.domain_updates = j["domain_updates"];
    r.stats.view_calls = j["view_calls"];
    r.stats.arith_ops = j["arith_ops"];
    r.stats.solutions = j["solutions"];
    if (!j["objective"].is_null()) r.objective = j["objective"].get<Int>();
    if (j.contains("error")) r.error = j["error"];
    return r;
}

inline std::string csv_header() {
    std::string out;
    for (const char* f : kRecordFields) out += std::string(out.empty() ? "" : ",") + f;
    return out;
}

inline std::string to_csv(const RunRecord& r) {
    std::ostringstream os;
    os << r.problem << ',' << r.instance << ',' << r.variant << ',' << to_string(r.status) << ',' << r.stats.time_ms
       << ',' << r.stats.propagations << ',' << r.stats.fails << ',' << r.stats.domain_updates << ','
       << r.stats.view_calls << ',' << r.stats.arith_ops << ',' << r.stats.solutions << ',';
    if (r.objective) os << *r.objective;
    return os.str();
}

// ---------------------------------------------------------------------------
// Instance specs as JSON

inline InstanceSpec spec_from_json(const json& j) {
    std::string p = j.at("problem");
    auto i = [&](const char* k) { return j.at(k).get<int>(); };
    auto seed = [&]() { return j.value("seed", std::uint64_t{1}); };
    InstanceSpec sp;
    if (p == "linear") sp = LinearSpec{i("n"), i("d"), i("c"), i("a"), seed()};
    else if (p == "nonlinear") sp = NonlinearSpec{i("n"), i("d"), i("c"), i("a1"), i("a2"), seed()};
    else if (p == "golfers") sp = GolfersSpec{i("w"), i("g"), i("s")};
    else if (p == "golomb") sp = GolombSpec{i("m"), i("length")};
    else if (p == "labs") sp = LabsSpec{i("n")};
    else if (p == "ecc") {
        std::string metric = j.value("metric", "hamming");
        if (metric != "hamming" && metric != "lee") throw std::invalid_argument("boxview: unknown metric " + metric);
        sp = EccSpec{i("a"), i("n"), i("l"), i("d"), metric == "lee" ? Metric::Lee : Metric::Hamming};
    } else {
        throw std::invalid_argument("boxview: unknown problem '" + p + "'");
    }
    validate(sp);
    return sp;
}

inline json spec_to_json(const InstanceSpec& sp) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearSpec>)
                return {{"problem", "linear"}, {"n", s.n}, {"d", s.d}, {"c", s.c}, {"a", s.a}, {"seed", s.seed}};
            else if constexpr (std::is_same_v<T, NonlinearSpec>)
                return {{"problem", "nonlinear"}, {"n", s.n}, {"d", s.d},       {"c", s.c},
                        {"a1", s.a1},             {"a2", s.a2}, {"seed", s.seed}};
            else if constexpr (std::is_same_v<T, GolfersSpec>)
                return {{"problem", "golfers"}, {"w", s.w}, {"g", s.g}, {"s", s.s}};
            else if constexpr (std::is_same_v<T, GolombSpec>)
                return {{"problem", "golomb"}, {"m", s.m}, {"length", s.length}};
            else if constexpr (std::is_same_v<T, LabsSpec>)
                return {{"problem", "labs"}, {"n", s.n}};
            else
                return {{"problem", "ecc"}, {"a", s.a}, {"n", s.n}, {"l", s.l}, {"d", s.d},
                        {"metric", s.metric == Metric::Lee ? "lee" : "hamming"}};
        },
        sp);
}

struct SuiteEntry {
    InstanceSpec spec;
    double time_limit_ms = 0;
};

/// A suite file is a JSON array of instance specs; an entry may carry its
/// own "time_limit_ms".
inline std::vector<SuiteEntry> parse_suite(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("boxview: suite must be a JSON array");
    std::vector<SuiteEntry> out;
    for (const auto& e : j) out.push_back({spec_from_json(e), e.value("time_limit_ms", 0.0)});
    return out;
}

inline std::vector<SuiteEntry> load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("boxview: cannot open suite " + path);
    return parse_suite(json::parse(in));
}

// ---------------------------------------------------------------------------
// Single runs

struct RunOptions {
    Brancher brancher_template;  // var/value selection; vars are taken from the model
    SearchLimits limits;
};

inline RunRecord run_model(Model& m, const RunOptions& ro) {
    Brancher b = m.brancher(ro.brancher_template.var_select, ro.brancher_template.value_select);
    SearchResult res = solve(m, b, ro.limits);
    RunRecord r;
    r.problem = m.problem;
    r.instance = m.instance;
    r.variant = to_string(m.variant);
    r.stats = res.stats;
    r.objective = res.objective;
    if (res.status == SearchStatus::Timeout)
        r.status = RunStatus::Timeout;
    else if (m.optimization())
        r.status = res.objective ? RunStatus::Optimal : RunStatus::Unsat;
    else
        r.status = res.stats.solutions > 0 ? RunStatus::Sat : RunStatus::Unsat;
    return r;
}

inline RunRecord run_instance(const InstanceSpec& sp, ModelVariant v, const RunOptions& ro) {
    Model m = build_model(sp, v);
    return run_model(m, ro);
}

// ---------------------------------------------------------------------------
// Ratio summaries

struct RatioSummary {
    std::string label;
    std::size_t count = 0;
    double geometric_mean = 0;
    double geometric_stddev = 0;
    double min = 0;
    double max = 0;
};

inline RatioSummary summarize(const std::string& label, const std::vector<double>& ratios) {
    RatioSummary s;
    s.label = label;
    s.count = ratios.size();
    if (ratios.empty()) return s;
    double sum = 0;
    for (double r : ratios) sum += std::log(r);
    double mu = sum / ratios.size();
    double var = 0;
    for (double r : ratios) var += (std::log(r) - mu) * (std::log(r) - mu);
    var /= ratios.size();
    s.geometric_mean = std::exp(mu);
    s.geometric_stddev = std::exp(std::sqrt(var));
    s.min = *std::min_element(ratios.begin(), ratios.end());
    s.max = *std::max_element(ratios.begin(), ratios.end());
    return s;
}

inline json to_json(const RatioSummary& s) {
    return {{"group", s.label},
            {"count", s.count},
            {"geometric_mean", s.geometric_mean},
            {"geometric_stddev", s.geometric_stddev},
            {"min", s.min},
            {"max", s.max}};
}

/// Best (minimum) time per instance over a set of variants; empty when any of
/// them is missing or timed out.
inline std::optional<double> best_time(const std::vector<RunRecord>& rows, const std::string& instance,
                                       const std::vector<std::string>& variants) {
    std::optional<double> best;
    for (const auto& v : variants) {
        auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const RunRecord& r) { return r.instance == instance && r.variant == v; });
        if (it == rows.end()) continue;
        if (it->status == RunStatus::Timeout || it->status == RunStatus::Error) return std::nullopt;
        best = best ? std::min(*best, it->stats.time_ms) : it->stats.time_ms;
    }
    return best;
}

struct RatioTable {
    std::string title;
    std::vector<RatioSummary> rows;  // one per problem, then "all"
};

/// time(num) / time(den) per instance, grouped by problem. Instances where
/// either side timed out are excluded.
inline RatioTable ratio_table(const std::string& title, const std::vector<RunRecord>& rows,
                              const std::vector<std::string>& num, const std::vector<std::string>& den) {
    std::vector<std::string> problems, instances;
    std::map<std::string, std::string> problem_of;
    for (const auto& r : rows) {
        if (std::find(instances.begin(), instances.end(), r.instance) == instances.end()) {
            instances.push_back(r.instance);
            problem_of[r.instance] = r.problem;
        }
        if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) problems.push_back(r.problem);
    }
    std::map<std::string, std::vector<double>> by_problem;
    std::vector<double> all;
    for (const auto& inst : instances) {
        auto a = best_time(rows, inst, num), b = best_time(rows, inst, den);
        if (!a || !b) continue;
        double ratio = std::max(*a, 1e-6) / std::max(*b, 1e-6);
        by_problem[problem_of[inst]].push_back(ratio);
        all.push_back(ratio);
    }
    RatioTable t;
    t.title = title;
    for (const auto& p : problems)
        if (by_problem.count(p)) t.rows.push_back(summarize(p, by_problem[p]));
    t.rows.push_back(summarize("all", all));
    return t;
}

inline std::string format_table(const RatioTable& t) {
    std::ostringstream os;
    os << t.title << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %6s %10s %10s %10s %10s\n", "group", "n", "geo-mean", "geo-sd", "min",
                  "max");
    os << line;
    for (const auto& r : t.rows) {
        std::snprintf(line, sizeof line, "%-12s %6zu %10.3f %10.3f %10.3f %10.3f\n", r.label.c_str(), r.count,
                      r.geometric_mean, r.geometric_stddev, r.min, r.max);
        os << line;
    }
    return os.str();
}

inline std::vector<std::string> variant_names(std::initializer_list<ModelVariant> vs) {
    std::vector<std::string> out;
    for (auto v : vs) out.push_back(to_string(v));
    return out;
}

inline std::vector<RatioTable> standard_tables(const std::vector<RunRecord>& rows) {
    using MV = ModelVariant;
    return {
        ratio_table("static vs dynamic views (time ratio static/dynamic)", rows,
                    variant_names({MV::ViewsStatic, MV::ViewsStaticGlobal}),
                    variant_names({MV::ViewsDynamic, MV::ViewsDynamicGlobal})),
        ratio_table("views vs variables (time ratio best views/best vars)", rows,
                    variant_names({MV::ViewsStatic, MV::ViewsDynamic, MV::ViewsStaticGlobal, MV::ViewsDynamicGlobal}),
                    variant_names({MV::Vars, MV::VarsGlobal})),
    };
}

// ---------------------------------------------------------------------------
// Benchmark protocol

struct BenchOptions {
    std::vector<ModelVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
    int repeats = 10;          // initial repetitions
    int max_repeats = 50;      // stop repeating here even if still noisy
    double threshold = 0.02;   // relative standard deviation target
    bool median = false;       // report the median time instead of the minimum
    int jobs = 1;
    RunOptions run;
};

inline double relative_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    if (mean <= 0) return 0;
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / (xs.size() - 1)) / mean;
}

/// Repeats a run until the runtime is stable, then reports the minimum (or
/// median) time.
/// Counters come from the first run; search is deterministic.
inline RunRecord bench_one(const SuiteEntry& e, ModelVariant v, const BenchOptions& bo) {
    RunOptions ro = bo.run;
    if (e.time_limit_ms > 0) ro.limits.time_limit_ms = e.time_limit_ms;
    RunRecord first;
    try {
        first = run_instance(e.spec, v, ro);
        if (first.status == RunStatus::Timeout) return first;
        std::vector<double> times{first.stats.time_ms};
        while (static_cast<int>(times.size()) < bo.max_repeats &&
               (static_cast<int>(times.size()) < bo.repeats || relative_stddev(times) >= bo.threshold)) {
            RunRecord again = run_instance(e.spec, v, ro);
            if (again.status == RunStatus::Timeout) break;
            times.push_back(again.stats.time_ms);
        }
        std::sort(times.begin(), times.end());
        std::size_t h = times.size() / 2;
        first.stats.time_ms = !bo.median ? times.front()
                              : times.size() % 2 ? times[h]
                                                 : (times[h - 1] + times[h]) / 2;
    } catch (const std::exception& ex) {
        first.problem = problem_name(e.spec);
        first.instance = instance_id(e.spec);
        first.variant = to_string(v);
        first.status = RunStatus::Error;
        first.error = ex.what();
    }
    return first;
}

/// Runs every supported (instance, variant) pair; rows come back in suite
/// order regardless of the number of jobs.
inline std::vector<RunRecord> run_bench(const std::vector<SuiteEntry>& suite, const BenchOptions& bo,
                                        const std::function<void(const RunRecord&)>& on_row = {}) {
    std::vector<std::pair<std::size_t, ModelVariant>> work;
    for (std::size_t i = 0; i < suite.size(); ++i)
        for (ModelVariant v : bo.variants)
            if (supports(suite[i].spec, v)) work.emplace_back(i, v);
    std::vector<RunRecord> rows(work.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&]() {
        for (std::size_t k; (k = next++) < work.size();) {
            RunRecord r = bench_one(suite[work[k].first], work[k].second, bo);
            std::lock_guard<std::mutex> lock(mu);
            rows[k] = r;
            if (on_row) on_row(r);
        }
    };
    int jobs = std::max(1, bo.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

}  // namespace boxview
