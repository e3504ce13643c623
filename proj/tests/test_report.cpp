#include <gtest/gtest.h>

#include <cmath>

#include "boxview/boxview.hpp"
#include "boxview/report.hpp"

using namespace boxview;

namespace {

RunRecord rec(const std::string& problem, const std::string& inst, ModelVariant v, double t,
              RunStatus st = RunStatus::Sat) {
    RunRecord r;
    r.problem = problem;
    r.instance = inst;
    r.variant = to_string(v);
    r.status = st;
    r.stats.time_ms = t;
    return r;
}

}  // namespace

TEST(Record, JsonSchemaAndRoundTrip) {
    RunRecord r = run_instance(GolombSpec{5, 11}, ModelVariant::ViewsStatic, {});
    EXPECT_EQ(r.status, RunStatus::Sat);
    json j = to_json(r);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, std::vector<std::string>(std::begin(kRecordFields), std::end(kRecordFields)));
    std::string why;
    EXPECT_TRUE(valid_record(j, &why)) << why;
    RunRecord back = record_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.instance, "golomb-5-11");
    EXPECT_EQ(back.stats.propagations, r.stats.propagations);
    EXPECT_EQ(back.stats.domain_updates, r.stats.domain_updates);
    EXPECT_FALSE(back.objective);
}

TEST(Record, SchemaRejectsBadRecords) {
    json j = to_json(rec("labs", "labs-5", ModelVariant::Vars, 1.0));
    EXPECT_TRUE(valid_record(j));
    json missing = j;
    missing.erase("fails");
    EXPECT_FALSE(valid_record(missing));
    json neg = j;
    neg["propagations"] = -3;
    EXPECT_FALSE(valid_record(neg));
    json status = j;
    status["status"] = "done";
    EXPECT_FALSE(valid_record(status));
    json obj = j;
    obj["objective"] = "two";
    EXPECT_FALSE(valid_record(obj));
    EXPECT_THROW(record_from_json(missing), std::invalid_argument);
}

TEST(Record, CsvColumnOrder) {
    EXPECT_EQ(csv_header(),
              "problem,instance,variant,status,time_ms,propagations,fails,domain_updates,view_calls,arith_ops,"
              "solutions,objective");
    RunRecord r = rec("labs", "labs-5", ModelVariant::ViewsStatic, 2.5, RunStatus::Optimal);
    r.stats.propagations = 7;
    r.objective = 2;
    EXPECT_EQ(to_csv(r), "labs,labs-5,views-static,optimal,2.5,7,0,0,0,0,0,2");
}

TEST(Record, SolveStatuses) {
    EXPECT_EQ(run_instance(GolombSpec{5, 10}, ModelVariant::Vars, {}).status, RunStatus::Unsat);
    RunRecord labs = run_instance(LabsSpec{5}, ModelVariant::ViewsStatic, {});
    EXPECT_EQ(labs.status, RunStatus::Optimal);
    ASSERT_TRUE(labs.objective);
    EXPECT_EQ(*labs.objective, 2);
    RunOptions quick;
    quick.limits.time_limit_ms = 1;
    EXPECT_EQ(run_instance(GolombSpec{12, 85}, ModelVariant::Vars, quick).status, RunStatus::Timeout);
}

TEST(Suite, ParseAndRoundTrip) {
    json j = json::parse(R"([
        {"problem":"nonlinear","n":12,"d":5,"c":4,"a1":4,"a2":3,"seed":8,"time_limit_ms":1000},
        {"problem":"golomb","m":8,"length":34},
        {"problem":"ecc","a":3,"n":11,"l":5,"d":3,"metric":"lee"},
        {"problem":"labs","n":12}
    ])");
    auto suite = parse_suite(j);
    ASSERT_EQ(suite.size(), 4u);
    EXPECT_EQ(instance_id(suite[0].spec), "nonlinear-12-5-4-4-3-s8");
    EXPECT_EQ(suite[0].time_limit_ms, 1000);
    EXPECT_EQ(suite[1].time_limit_ms, 0);
    EXPECT_EQ(instance_id(suite[2].spec), "ecc-lee-3-11-5-3");
    for (const auto& e : suite) EXPECT_EQ(instance_id(spec_from_json(spec_to_json(e.spec))), instance_id(e.spec));
    EXPECT_THROW(parse_suite(json::object()), std::invalid_argument);
    EXPECT_THROW(spec_from_json(json{{"problem", "sudoku"}}), std::invalid_argument);
    EXPECT_THROW(spec_from_json(json{{"problem", "golomb"}, {"m", 5}, {"length", 2}}), std::invalid_argument);
    EXPECT_THROW(spec_from_json(json::parse(R"({"problem":"ecc","a":3,"n":4,"l":5,"d":3,"metric":"x"})")),
                 std::invalid_argument);
}

TEST(Suite, ShippedSuitesLoad) {
    auto base = load_suite(std::string(BOXVIEW_BENCH_DIR) + "/suite.json");
    auto full = load_suite(std::string(BOXVIEW_BENCH_DIR) + "/suite_full.json");
    EXPECT_GE(base.size(), 20u);
    EXPECT_GT(full.size(), base.size());
    std::set<std::string> problems;
    for (const auto& e : base) problems.insert(problem_name(e.spec));
    EXPECT_EQ(problems, (std::set<std::string>{"nonlinear", "golomb", "labs", "golfers", "ecc"}));
    EXPECT_THROW(load_suite("/nonexistent/suite.json"), std::runtime_error);
}

TEST(Ratios, SummaryStatistics) {
    auto s = summarize("x", {0.5, 2.0, 1.0});
    EXPECT_EQ(s.count, 3u);
    EXPECT_NEAR(s.geometric_mean, 1.0, 1e-12);
    EXPECT_NEAR(s.geometric_stddev, std::exp(std::sqrt(2 * std::log(2.0) * std::log(2.0) / 3)), 1e-12);
    EXPECT_EQ(s.min, 0.5);
    EXPECT_EQ(s.max, 2.0);
    EXPECT_EQ(summarize("e", {}).count, 0u);
}

TEST(Ratios, TwoVariantsOneInstance) {
    using MV = ModelVariant;
    std::vector<RunRecord> rows = {rec("golomb", "g1", MV::ViewsStatic, 3.0), rec("golomb", "g1", MV::Vars, 6.0)};
    auto t = ratio_table("t", rows, variant_names({MV::ViewsStatic}), variant_names({MV::Vars}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].label, "golomb");
    EXPECT_EQ(t.rows[0].count, 1u);
    EXPECT_DOUBLE_EQ(t.rows[0].geometric_mean, 0.5);
    EXPECT_EQ(t.rows[1].label, "all");
    EXPECT_NE(format_table(t).find("golomb"), std::string::npos);
}

TEST(Ratios, BestTimeAndTimeoutExclusion) {
    using MV = ModelVariant;
    std::vector<RunRecord> rows = {
        rec("labs", "a", MV::ViewsStatic, 4.0),  rec("labs", "a", MV::ViewsDynamic, 2.0),
        rec("labs", "a", MV::Vars, 8.0),         rec("labs", "a", MV::VarsGlobal, 16.0),
        rec("labs", "b", MV::ViewsStatic, 1.0),  rec("labs", "b", MV::ViewsDynamic, 1.0),
        rec("labs", "b", MV::Vars, 1.0, RunStatus::Timeout), rec("labs", "b", MV::VarsGlobal, 2.0),
    };
    auto views = variant_names({MV::ViewsStatic, MV::ViewsDynamic});
    auto vars = variant_names({MV::Vars, MV::VarsGlobal});
    EXPECT_EQ(best_time(rows, "a", views), 2.0);
    EXPECT_FALSE(best_time(rows, "b", vars));
    auto t = ratio_table("t", rows, views, vars);
    EXPECT_EQ(t.rows.back().count, 1u);
    EXPECT_DOUBLE_EQ(t.rows.back().geometric_mean, 0.25);
    EXPECT_EQ(standard_tables(rows).size(), 2u);
}

TEST(Bench, RelativeStddev) {
    EXPECT_EQ(relative_stddev({5.0}), 0);
    EXPECT_NEAR(relative_stddev({1.0, 3.0}), std::sqrt(2.0) / 2.0, 1e-12);
}

TEST(Bench, CountersDeterministicAcrossRunsAndJobs) {
    std::vector<SuiteEntry> suite = {{GolombSpec{7, 25}, 0}, {NonlinearSpec{8, 4, 3, 3, 2, 5}, 0}, {LabsSpec{9}, 0},
                                     {GolfersSpec{3, 3, 2}, 0}, {EccSpec{2, 5, 6, 3, Metric::Hamming}, 0}};
    BenchOptions bo;
    bo.repeats = 2;
    bo.max_repeats = 3;
    auto a = run_bench(suite, bo);
    auto b = run_bench(suite, bo);
    bo.jobs = 3;
    std::size_t streamed = 0;
    auto c = run_bench(suite, bo, [&](const RunRecord&) { ++streamed; });
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.size(), c.size());
    EXPECT_EQ(streamed, c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (const auto* x : {&b[i], &c[i]}) {
            EXPECT_EQ(a[i].instance, x->instance);
            EXPECT_EQ(a[i].variant, x->variant);
            EXPECT_EQ(a[i].status, x->status);
            EXPECT_EQ(a[i].stats.propagations, x->stats.propagations);
            EXPECT_EQ(a[i].stats.fails, x->stats.fails);
            EXPECT_EQ(a[i].stats.domain_updates, x->stats.domain_updates);
            EXPECT_EQ(a[i].stats.view_calls, x->stats.view_calls);
        }
        EXPECT_TRUE(valid_record(to_json(a[i])));
    }
    // labs has no global views: 5 instances x 6 variants - 2
    EXPECT_EQ(a.size(), 28u);
}

TEST(Bench, MedianOption) {
    std::vector<SuiteEntry> suite = {{GolombSpec{7, 25}, 0}};
    BenchOptions bo;
    bo.variants = {ModelVariant::ViewsStatic};
    bo.repeats = 5;
    bo.max_repeats = 5;
    auto mn = run_bench(suite, bo);
    bo.median = true;
    auto md = run_bench(suite, bo);
    ASSERT_EQ(mn.size(), 1u);
    ASSERT_EQ(md.size(), 1u);
    EXPECT_GT(md[0].stats.time_ms, 0);
    EXPECT_EQ(md[0].stats.propagations, mn[0].stats.propagations);
}

TEST(Bench, ErrorsAreRecordedPerRow) {
    std::vector<SuiteEntry> suite = {{LabsSpec{6}, 0}};
    BenchOptions bo;
    bo.variants = {ModelVariant::ViewsStaticGlobal, ModelVariant::ViewsStatic};
    bo.repeats = 1;
    auto rows = run_bench(suite, bo);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].status, RunStatus::Optimal);

    std::vector<SuiteEntry> huge = {{NonlinearSpec{4, 1000000000, 1, 2, 4, 1}, 0}};
    auto err = run_bench(huge, bo);
    ASSERT_FALSE(err.empty());
    for (const auto& r : err) {
        EXPECT_EQ(r.status, RunStatus::Error);
        EXPECT_FALSE(r.error.empty());
        EXPECT_EQ(r.instance, "nonlinear-4-1000000000-1-2-4-s1");
    }
}
