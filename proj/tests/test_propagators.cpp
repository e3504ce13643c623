#include <gtest/gtest.h>

#include "boxview/boxview.hpp"
#include "boxview/oracle.hpp"
#include "boxview/verify.hpp"

using namespace boxview;

namespace {

struct Fixture {
    Store s;
    Var v(Int lo, Int hi) { return Var(s, s.new_var(lo, hi)); }
    Interval dom(const Var& x) const { return s.domain(x.id()); }
    Status run(std::unique_ptr<Propagator> p) {
        PropId id = s.add(std::move(p));
        return s.propagator(id).execute();
    }
};

oracle::CheckReport check(const std::string& name, std::size_t arity,
                          std::function<bool(const Tuple&)> member,
                          std::function<void(Store&, const std::vector<VarId>&)> post, const Box& universe) {
    oracle::ConstraintExt c{arity, std::move(member)};
    return oracle::check_propagator(name, oracle::engine_propagator(std::move(post)), c, ApproxKind::Beta,
                                    ApproxKind::Beta, universe);
}

std::vector<Var> vars(Store& s, const std::vector<VarId>& ids) {
    std::vector<Var> out;
    for (VarId v : ids) out.emplace_back(s, v);
    return out;
}

}  // namespace

TEST(Eq, Examples) {
    Fixture f;
    Var x = f.v(1, 4), y = f.v(3, 6);
    EXPECT_NE(f.run(eq(x, y)), Status::Failed);
    EXPECT_EQ(f.dom(x), Interval(3, 4));
    EXPECT_EQ(f.dom(y), Interval(3, 4));

    Fixture g;
    Var a = g.v(2, 2), b = g.v(2, 2);
    auto u = g.s.stats().domain_updates;
    EXPECT_EQ(g.run(eq(a, b)), Status::Idempotent);
    EXPECT_EQ(g.s.stats().domain_updates, u);

    Fixture h;
    EXPECT_EQ(h.run(eq(h.v(1, 2), h.v(5, 6))), Status::Failed);
}

TEST(Neq, PlainVariable) {
    Fixture f;
    Var x = f.v(4, 7);
    EXPECT_EQ(f.run(neq(x, 4)), Status::Idempotent);
    EXPECT_EQ(f.dom(x), Interval(5, 7));
    Fixture g;
    EXPECT_EQ(g.run(neq(g.v(3, 3), 3)), Status::Failed);
}

TEST(Neq, CompositeViewReportsSuspend) {
    Fixture f;
    Var y1 = f.v(1, 2), y2 = f.v(1, 2);
    EXPECT_EQ(f.run(neq(Add<Var, Var>(y1, y2), 4)), Status::Suspend);
    EXPECT_EQ(f.dom(y1), Interval(1, 2));
    EXPECT_EQ(f.dom(y2), Interval(1, 2));
}

TEST(Leq, Examples) {
    Fixture f;
    Var x = f.v(3, 9), y = f.v(1, 5);
    EXPECT_NE(f.run(leq(x, y)), Status::Failed);
    EXPECT_EQ(f.dom(x), Interval(3, 5));
    EXPECT_EQ(f.dom(y), Interval(3, 5));

    Fixture g;
    Var a = g.v(0, 2), b = g.v(2, 4);
    EXPECT_EQ(g.run(leq(a, b)), Status::Idempotent);
    EXPECT_EQ(g.dom(a), Interval(0, 2));

    Fixture h;
    EXPECT_EQ(h.run(leq(h.v(6, 7), h.v(1, 5))), Status::Failed);
}

TEST(SumEq, Examples) {
    Fixture f;
    Var x = f.v(1, 3), y = f.v(2, 5), z = f.v(0, 4);
    EXPECT_NE(f.run(sum_eq(std::vector<Var>{x, y}, z)), Status::Failed);
    EXPECT_EQ(f.dom(z), Interval(3, 4));
    EXPECT_EQ(f.dom(x), Interval(1, 2));
    EXPECT_EQ(f.dom(y), Interval(2, 3));

    Fixture g;
    EXPECT_EQ(g.run(sum_eq(std::vector<Var>{g.v(1, 1), g.v(2, 2)}, g.v(3, 3))), Status::Idempotent);

    Fixture h;
    EXPECT_EQ(h.run(sum_eq(std::vector<Var>{h.v(3, 4), h.v(3, 4)}, Const(h.s, 5))), Status::Failed);
}

TEST(LinearEq, Examples) {
    Fixture f;
    Var x = f.v(0, 1), y = f.v(0, 1), z = f.v(0, 5);
    EXPECT_NE(f.run(linear_eq({2, 3, -1}, std::vector<Var>{x, y, z}, 0)), Status::Failed);
    EXPECT_EQ(f.dom(z), Interval(0, 5));

    Fixture g;
    EXPECT_EQ(g.run(linear_eq({2, 3, -1}, std::vector<Var>{g.v(0, 1), g.v(0, 1), g.v(1, 1)}, 0)), Status::Failed);

    Fixture h;
    Var k = h.v(-10, 10);
    EXPECT_NE(h.run(linear_eq({1}, std::vector<Var>{k}, 7)), Status::Failed);
    EXPECT_EQ(h.dom(k), Interval(7, 7));
}

TEST(MulEq, Examples) {
    Fixture f;
    Var x = f.v(2, 3), y = f.v(2, 3), z = f.v(9, 15);
    EXPECT_NE(f.run(mul_eq(x, y, z)), Status::Failed);
    EXPECT_EQ(f.dom(z), Interval(9, 9));
    EXPECT_EQ(f.dom(x), Interval(3, 3));
    EXPECT_EQ(f.dom(y), Interval(3, 3));

    Fixture g;
    Var a = g.v(0, 0), b = g.v(-4, 4), c = g.v(-20, 20);
    EXPECT_NE(g.run(mul_eq(a, b, c)), Status::Failed);
    EXPECT_EQ(g.dom(c), Interval(0, 0));

    Fixture h;
    EXPECT_EQ(h.run(mul_eq(h.v(2, 2), h.v(3, 3), h.v(1, 1))), Status::Failed);
}

TEST(DistinctBounds, Examples) {
    Fixture f;
    Var a = f.v(1, 2), b = f.v(1, 2), c = f.v(1, 3);
    EXPECT_NE(f.run(distinct_bounds(std::vector<Var>{a, b, c})), Status::Failed);
    EXPECT_EQ(f.dom(c), Interval(3, 3));

    Fixture g;
    EXPECT_EQ(g.run(distinct_bounds(std::vector<Var>{g.v(1, 1), g.v(2, 2), g.v(3, 3)})), Status::Idempotent);

    Fixture h;
    EXPECT_EQ(h.run(distinct_bounds(std::vector<Var>{h.v(1, 2), h.v(1, 2), h.v(1, 2)})), Status::Failed);
}

TEST(DistinctBounds, StateSurvivesBacktracking) {
    Store s;
    std::vector<VarId> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(s.new_var(0, 3));
    s.add(distinct_bounds(vars(s, ids)));
    ASSERT_TRUE(s.fixpoint());
    s.push();
    ASSERT_TRUE(s.upd_max(ids[0], 0));
    ASSERT_TRUE(s.upd_max(ids[1], 1));
    ASSERT_TRUE(s.fixpoint());
    EXPECT_EQ(s.domain(ids[1]), Interval(1, 1));
    EXPECT_EQ(s.domain(ids[2]), Interval(2, 3));
    s.pop();
    s.push();
    ASSERT_TRUE(s.upd_min(ids[3], 3));
    ASSERT_TRUE(s.upd_min(ids[2], 2));
    ASSERT_TRUE(s.fixpoint());
    EXPECT_EQ(s.domain(ids[2]), Interval(2, 2));
    EXPECT_EQ(s.domain(ids[0]), Interval(0, 1));
    s.pop();
    EXPECT_EQ(s.domain(ids[2]), Interval(0, 3));
}

TEST(Completeness, EqLeqNeq) {
    Box u{{0, 4}, {0, 4}};
    auto e = check("eq", 2, [](const Tuple& t) { return t[0] == t[1]; },
                   [](Store& s, const std::vector<VarId>& v) { s.add(eq(Var(s, v[0]), Var(s, v[1]))); }, u);
    EXPECT_TRUE(e.ok()) << e.counterexample;
    auto l = check("leq", 2, [](const Tuple& t) { return t[0] <= t[1]; },
                   [](Store& s, const std::vector<VarId>& v) { s.add(leq(Var(s, v[0]), Var(s, v[1]))); }, u);
    EXPECT_TRUE(l.ok()) << l.counterexample;
    auto n = check("neq", 1, [](const Tuple& t) { return t[0] != 2; },
                   [](Store& s, const std::vector<VarId>& v) { s.add(neq(Var(s, v[0]), 2)); }, Box{{0, 4}});
    EXPECT_TRUE(n.ok()) << n.counterexample;
}

TEST(Completeness, SumAndLinear) {
    Box u{{0, 4}, {0, 4}, {0, 4}};
    auto s3 = check("sum_eq", 3, [](const Tuple& t) { return t[0] + t[1] == t[2]; },
                    [](Store& s, const std::vector<VarId>& v) {
                        s.add(sum_eq(vars(s, {v[0], v[1]}), Var(s, v[2])));
                    },
                    u);
    EXPECT_TRUE(s3.ok()) << s3.counterexample;
    auto lin = check("linear_eq", 3, [](const Tuple& t) { return 2 * t[0] + 3 * t[1] == t[2]; },
                     [](Store& s, const std::vector<VarId>& v) { s.add(linear_eq({2, 3, -1}, vars(s, v), 0)); }, u);
    EXPECT_TRUE(lin.ok()) << lin.counterexample;
}

TEST(Completeness, DistinctBoundsThreeVars) {
    auto d = check("distinct", 3, [](const Tuple& t) { return t[0] != t[1] && t[0] != t[2] && t[1] != t[2]; },
                   [](Store& s, const std::vector<VarId>& v) { s.add(distinct_bounds(vars(s, v))); },
                   Box{{0, 4}, {0, 4}, {0, 4}});
    EXPECT_TRUE(d.ok()) << d.counterexample;
}

TEST(Completeness, MulEqSoundOnly) {
    auto m = check("mul_eq", 3, [](const Tuple& t) { return t[0] * t[1] == t[2]; },
                   [](Store& s, const std::vector<VarId>& v) { s.add(mul_eq(Var(s, v[0]), Var(s, v[1]), Var(s, v[2]))); },
                   Box{{-2, 2}, {-2, 2}, {-4, 4}});
    EXPECT_TRUE(m.contracting);
    EXPECT_TRUE(m.sound) << m.counterexample;
}

TEST(Completeness, FaultyMulLosesSolutions) {
    Store s;
    Var x(s, s.new_var(2, 3)), y(s, s.new_var(2, 3));
    Mul<Var, Var>(x, y).upd_max(6);
    EXPECT_EQ(s.domain(x.id()), Interval(2, 3));
    // (2,3) has product 6 but the faulty inverse drops it
    verify::FaultyMul<Var, Var> faulty(x, y);
    ASSERT_TRUE(faulty.upd_max(6));
    EXPECT_FALSE(s.domain(x.id()).contains(3) || s.domain(y.id()).contains(3));
}

TEST(IdempotencyAudit, RandomizedAllKinds) {
    verify::Options opt;
    opt.random_cases = 3000;
    opt.seed = 7;
    auto r = verify::idempotency_audit(opt);
    EXPECT_TRUE(r.passed()) << (r.failures.empty() ? "" : r.failures.front());
    ASSERT_FALSE(r.records.empty());
    EXPECT_GE(r.records.back().at("cases").get<std::size_t>(), 3000u);
    EXPECT_GT(r.checks, 0u);
}
