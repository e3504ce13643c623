#include <gtest/gtest.h>

#include <random>

#include "boxview/boxview.hpp"

using namespace boxview;

namespace {

struct Fixture {
    Store s;
    VarId var(Int lo, Int hi) { return s.new_var(lo, hi); }
    Var v(Int lo, Int hi) { return Var(s, var(lo, hi)); }
};

Interval dom(const Var& v) { return v.store().domain(v.id()); }

bool has(const std::vector<VarEvent>& ts, int var, EventMask ev) {
    for (const auto& t : ts)
        if (t.var == var && (t.events & ev) == ev) return true;
    return false;
}

// Independent enumeration of the image hull of a binary function.
template <class F>
Interval image_hull(Interval a, Interval b, F f) {
    Int lo = kIntMax, hi = kIntMin;
    for (Int x = a.lo; x <= a.hi; ++x)
        for (Int y = b.lo; y <= b.hi; ++y) {
            Int z = f(x, y);
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
    return {lo, hi};
}

}  // namespace

TEST(Views, ConstAndVar) {
    Fixture f;
    Const c(f.s, 5);
    EXPECT_EQ(c.get_min(), 5);
    EXPECT_EQ(c.get_max(), 5);
    EXPECT_TRUE(c.upd_min(5));
    EXPECT_FALSE(c.upd_min(6));
    Var x = f.v(1, 3);
    EXPECT_EQ(bounds(x), Interval(1, 3));
    EXPECT_TRUE(trigger_map(c, event::kBounds).empty());
}

TEST(Views, AddBoundsAndUpdates) {
    Fixture f;
    Var x = f.v(1, 3), y = f.v(2, 5);
    Add<Var, Var> a(x, y);
    EXPECT_EQ(bounds(a), Interval(3, 8));
    EXPECT_TRUE(a.upd_max(4));
    EXPECT_EQ(dom(x), Interval(1, 2));
    EXPECT_EQ(dom(y), Interval(2, 3));
}

TEST(Views, NegMirrors) {
    Fixture f;
    Var x = f.v(1, 3);
    Neg<Var> n(x);
    EXPECT_EQ(bounds(n), Interval(-3, -1));
    EXPECT_TRUE(n.upd_min(-2));
    EXPECT_EQ(dom(x), Interval(1, 2));
    auto ts = trigger_map(n, event::kMin);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].events, event::kMax);
}

TEST(Views, LinearTermRoundsInward) {
    Fixture f;
    Var x = f.v(-5, 5);
    Lin<Var> l(3, x);
    EXPECT_EQ(bounds(l), Interval(-15, 15));
    EXPECT_TRUE(l.upd_min(4));
    EXPECT_EQ(dom(x).lo, 2);
    EXPECT_TRUE(l.upd_max(10));
    EXPECT_EQ(dom(x).hi, 3);
    Lin<Var> m(-2, x);
    EXPECT_EQ(bounds(m), Interval(-6, -4));
    EXPECT_TRUE(m.upd_min(-5));
    EXPECT_EQ(dom(x), Interval(2, 2));
}

TEST(Views, AbsThreeCases) {
    Fixture f;
    EXPECT_EQ(bounds(Abs<Var>(f.v(2, 5))), Interval(2, 5));
    EXPECT_EQ(bounds(Abs<Var>(f.v(-5, -2))), Interval(2, 5));
    Var x = f.v(-3, 2);
    Abs<Var> a(x);
    EXPECT_EQ(bounds(a), Interval(0, 3));
    EXPECT_TRUE(a.upd_min(-4));
    EXPECT_EQ(dom(x), Interval(-3, 2));
    EXPECT_TRUE(a.upd_max(1));
    EXPECT_EQ(dom(x), Interval(-1, 1));
}

TEST(Views, MulBoundsAndFailure) {
    Fixture f;
    Var x = f.v(2, 3), y = f.v(2, 3);
    Mul<Var, Var> m(x, y);
    EXPECT_EQ(bounds(m), Interval(4, 9));
    EXPECT_FALSE(m.upd_min(10));
}

TEST(Views, MulZeroSpanningCofactorDoesNotPrune) {
    Fixture f;
    Var x = f.v(-3, 3), y = f.v(-2, 4);
    Mul<Var, Var> m(x, y);
    EXPECT_TRUE(m.upd_min(5));
    EXPECT_EQ(dom(x), Interval(-3, 3));
    EXPECT_EQ(dom(y), Interval(-2, 4));
}

TEST(Views, SqrSpansZero) {
    Fixture f;
    Var x = f.v(-2, 3);
    Sqr<Var> q(x);
    EXPECT_EQ(bounds(q), Interval(0, 9));
    EXPECT_TRUE(q.upd_max(4));
    EXPECT_EQ(dom(x), Interval(-2, 2));
    EXPECT_TRUE(q.upd_min(1));
    EXPECT_EQ(dom(x), Interval(-2, 2));
}

TEST(Views, MinMax) {
    Fixture f;
    Var x = f.v(1, 5), y = f.v(3, 4);
    Min2<Var, Var> mn(x, y);
    EXPECT_EQ(bounds(mn), Interval(1, 4));
    EXPECT_TRUE(mn.upd_min(3));
    EXPECT_EQ(dom(x), Interval(3, 5));
    EXPECT_EQ(dom(y), Interval(3, 4));

    Fixture g;
    Var a = g.v(1, 5), b = g.v(3, 4);
    Min2<Var, Var> mn2(a, b);
    EXPECT_TRUE(mn2.upd_max(2));
    EXPECT_EQ(dom(a), Interval(1, 2));
    EXPECT_EQ(dom(b), Interval(3, 4));

    Fixture h;
    Var c = h.v(1, 5), d = h.v(3, 4);
    Max2<Var, Var> mx(c, d);
    EXPECT_EQ(bounds(mx), Interval(3, 5));
    EXPECT_TRUE(mx.upd_max(4));
    EXPECT_EQ(dom(c), Interval(1, 4));
    EXPECT_EQ(dom(d), Interval(3, 4));
}

TEST(Views, Reified) {
    Fixture f;
    EXPECT_EQ(bounds(ReifEq<Var, Var>(f.v(2, 2), f.v(2, 2))), Interval(1, 1));
    EXPECT_EQ(bounds(ReifEq<Var, Var>(f.v(0, 1), f.v(3, 4))), Interval(0, 0));
    Var x = f.v(1, 4), y = f.v(3, 6);
    ReifEq<Var, Var> r(x, y);
    EXPECT_EQ(bounds(r), Interval(0, 1));
    EXPECT_TRUE(r.upd_min(1));
    EXPECT_EQ(dom(x), Interval(3, 4));
    EXPECT_EQ(dom(y), Interval(3, 4));

    Var a = f.v(2, 2), b = f.v(2, 5);
    ReifNeq<Var, Var> n(a, b);
    EXPECT_TRUE(n.upd_min(1));
    EXPECT_EQ(dom(b), Interval(3, 5));

    Var c = f.v(0, 5), d = f.v(2, 3);
    ReifLeq<Var, Var> l(c, d);
    EXPECT_TRUE(l.upd_min(1));
    EXPECT_EQ(dom(c), Interval(0, 3));
    EXPECT_TRUE(l.upd_max(0));
    EXPECT_EQ(dom(c), Interval(3, 3));
    EXPECT_EQ(dom(d), Interval(2, 2));
}

TEST(Views, IfThenElse) {
    Fixture f;
    Var c = f.v(0, 1), t = f.v(1, 2), e = f.v(5, 6);
    IfThenElse<Var, Var, Var> ite(c, t, e);
    EXPECT_EQ(bounds(ite), Interval(1, 6));
    f.s.push();
    ASSERT_TRUE(c.upd_min(1));
    EXPECT_EQ(bounds(ite), Interval(1, 2));
    f.s.pop();
    EXPECT_FALSE(ite.upd_max(0));
}

TEST(Views, IfThenElseTriggersMoveOnlyWhenGround) {
    Fixture f;
    Var c = f.v(0, 1), t = f.v(1, 2), e = f.v(5, 6);
    IfThenElse<Var, Var, Var> ite(c, t, e);
    auto before = trigger_map(ite, event::kBounds, false);
    EXPECT_TRUE(has(before, t.id().index, event::kMin));
    EXPECT_TRUE(has(before, e.id().index, event::kMin));
    ASSERT_TRUE(c.upd_max(0));
    auto after = trigger_map(ite, event::kBounds, false);
    EXPECT_FALSE(has(after, t.id().index, event::kMin));
    EXPECT_TRUE(has(after, e.id().index, event::kMin));
    auto full = trigger_map(ite, event::kBounds, true);
    EXPECT_TRUE(has(full, t.id().index, event::kMin));
}

TEST(Views, AddTriggersCoverFourBounds) {
    Fixture f;
    Var x = f.v(0, 3), y = f.v(0, 3);
    auto ts = trigger_map(Add<Var, Var>(x, y), event::kBounds);
    EXPECT_TRUE(has(ts, x.id().index, event::kMin));
    EXPECT_TRUE(has(ts, x.id().index, event::kMax));
    EXPECT_TRUE(has(ts, y.id().index, event::kMin));
    EXPECT_TRUE(has(ts, y.id().index, event::kMax));
}

TEST(Views, NonPersistentUpdateWitness) {
    Fixture f;
    Var y1 = f.v(1, 2), y2 = f.v(1, 2);
    Add<Var, Var> a(y1, y2);
    EXPECT_TRUE(a.upd_max(4 - 1));
    EXPECT_EQ(a.get_max(), 4);
    EXPECT_EQ(dom(y1), Interval(1, 2));
}

TEST(Views, SumCacheOnOffAgree) {
    for (bool cache : {true, false}) {
        Fixture f;
        f.s.options().view_cache = cache;
        std::vector<Var> xs{f.v(0, 3), f.v(1, 4), f.v(-2, 2)};
        SumN<Var> sum(xs);
        EXPECT_EQ(bounds(sum), Interval(-1, 9));
        EXPECT_TRUE(sum.upd_max(0));
        EXPECT_EQ(dom(xs[0]), Interval(0, 1));
        EXPECT_EQ(dom(xs[1]), Interval(1, 2));
        EXPECT_EQ(dom(xs[2]), Interval(-2, -1));
    }
}

TEST(Views, OverflowIsChecked) {
    Fixture f;
    Var x = f.v(0, kIntMax / 2 + 10), y = f.v(0, 4);
    Mul<Var, Var> m(x, y);
    EXPECT_THROW(m.get_max(), OverflowError);
}

TEST(Views, DynBoxCountsCallsStaticDoesNot) {
    Fixture f;
    Var x = f.v(0, 3), y = f.v(0, 3);
    auto dyn = make_dyn(Add<Var, Var>(x, y));
    Add<Var, Var> st(x, y);
    auto c0 = f.s.stats().view_calls;
    (void)st.get_min();
    (void)st.get_max();
    EXPECT_EQ(f.s.stats().view_calls, c0);
    (void)dyn.get_min();
    (void)dyn.get_max();
    EXPECT_TRUE(dyn.upd_max(2));
    EXPECT_EQ(f.s.stats().view_calls, c0 + 3);
}

TEST(Views, MonotonicReads) {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 2000; ++k) {
        Fixture f;
        Var x = f.v(-4, 4), y = f.v(-3, 5);
        Mul<Add<Var, Var>, Var> v(Add<Var, Var>(x, y), x);
        Interval before = bounds(v);
        Int i = static_cast<Int>(rng() % 41) - 20;
        bool ok = (rng() % 2) ? v.upd_min(i) : v.upd_max(i);
        if (!ok) continue;
        Interval after = bounds(v);
        ASSERT_LE(before.lo, after.lo);
        ASSERT_GE(before.hi, after.hi);
    }
}

TEST(Views, BoundsMatchEnumerationForBinaryKinds) {
    for (Int al = -3; al <= 3; ++al)
        for (Int ah = al; ah <= 3; ++ah)
            for (Int bl = -3; bl <= 3; ++bl)
                for (Int bh = bl; bh <= 3; ++bh) {
                    Fixture f;
                    Var x = f.v(al, ah), y = f.v(bl, bh);
                    Interval a{al, ah}, b{bl, bh};
                    ASSERT_EQ(bounds(Mul<Var, Var>(x, y)), image_hull(a, b, [](Int p, Int q) { return p * q; }));
                    ASSERT_EQ(bounds(Sub<Var, Var>(x, y)), image_hull(a, b, [](Int p, Int q) { return p - q; }));
                    ASSERT_EQ(bounds(Min2<Var, Var>(x, y)),
                              image_hull(a, b, [](Int p, Int q) { return std::min(p, q); }));
                    ASSERT_EQ(bounds(ReifLeq<Var, Var>(x, y)),
                              image_hull(a, b, [](Int p, Int q) { return Int{p <= q}; }));
                }
}

// Every pair removed by an update must have had its image outside the requested bound.
TEST(Views, MulUpdatesAreSoundByEnumeration) {
    for (Int al = -3; al <= 3; ++al)
        for (Int ah = al; ah <= 3; ++ah)
            for (Int bl = -2; bl <= 2; ++bl)
                for (Int bh = bl; bh <= 2; ++bh)
                    for (Int i = -10; i <= 10; ++i)
                        for (int dir = 0; dir < 2; ++dir) {
                            Fixture f;
                            Var x = f.v(al, ah), y = f.v(bl, bh);
                            Mul<Var, Var> m(x, y);
                            bool ok = dir ? m.upd_max(i) : m.upd_min(i);
                            for (Int p = al; p <= ah; ++p)
                                for (Int q = bl; q <= bh; ++q) {
                                    bool want = dir ? p * q <= i : p * q >= i;
                                    if (!want) continue;
                                    ASSERT_TRUE(ok);
                                    ASSERT_TRUE(dom(x).contains(p) && dom(y).contains(q));
                                }
                        }
}

TEST(ViewNode, PrefixRoundTrip) {
    Store s;
    VarId a = s.new_var(0, 3, "x1"), b = s.new_var(0, 3, "x2"), c = s.new_var(0, 3, "x3");
    ViewNode n = vn::add(vn::var(s, a), vn::mul(vn::var(s, b), vn::var(s, c)));
    std::string text = to_string(n);
    EXPECT_EQ(text, "(add (var x1) (mul (var x2) (var x3)))");
    ViewNode back = parse_view(text, store_resolver(s));
    EXPECT_EQ(to_string(back), text);
    EXPECT_THROW(parse_view("(add (var zz) (const 1))", store_resolver(s)), std::exception);
    EXPECT_THROW(parse_view("(add (var x1)", store_resolver(s)), ParseError);
}

TEST(ViewNode, EvaluateAgreesWithStaticAndDynamicBuilds) {
    Store s;
    VarId a = s.new_var(-2, 2, "a"), b = s.new_var(-2, 2, "b");
    ViewNode n = vn::sub(vn::abs(vn::mul(vn::var(s, a), vn::var(s, b))), vn::lin(3, vn::var(s, b)));
    TreeView st = build_static(n, s);
    DynBox dy = build_dynamic(n, s);
    Int lo = kIntMax, hi = kIntMin;
    for (Int p = -2; p <= 2; ++p)
        for (Int q = -2; q <= 2; ++q) {
            Int v = evaluate(n, [&](VarId id) { return id == a ? p : q; });
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    EXPECT_EQ(bounds(st), Interval(lo, hi));
    EXPECT_EQ(bounds(dy), Interval(lo, hi));
}

TEST(ViewNode, ValidateArity) {
    EXPECT_THROW(validate(vn::node(NodeKind::Add, {vn::cst(1)})), std::invalid_argument);
    EXPECT_NO_THROW(validate(vn::sum({vn::cst(1), vn::cst(2), vn::cst(3)})));
}
