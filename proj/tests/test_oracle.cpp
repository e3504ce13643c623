#include <gtest/gtest.h>

#include <random>

#include "boxview/boxview.hpp"
#include "boxview/oracle.hpp"

using namespace boxview;
using namespace boxview::oracle;

namespace {

TupleSet unary(std::initializer_list<Int> vs) {
    TupleSet s(1);
    for (Int v : vs) s.insert({v});
    return s;
}

TupleSet range1(Int lo, Int hi) { return box_tuples(Box{{lo, hi}}); }

FuncSpec plus_one() {
    return scalar(1, [](const Tuple& t) { return t[0] + 1; });
}
FuncSpec add2() {
    return scalar(2, [](const Tuple& t) { return t[0] + t[1]; });
}
FuncSpec mul2() {
    return scalar(2, [](const Tuple& t) { return t[0] * t[1]; });
}

ConstraintExt equal2() {
    return ConstraintExt{2, [](const Tuple& t) { return t[0] == t[1]; }};
}

// [2x + 3y = z]
ConstraintExt lin23() {
    return ConstraintExt{3, [](const Tuple& t) { return 2 * t[0] + 3 * t[1] == t[2]; }};
}

// [2 u = z]
ConstraintExt double_eq() {
    return ConstraintExt{2, [](const Tuple& t) { return 2 * t[0] == t[1]; }};
}

// (x1*x2) x p3
FuncSpec mul_times_id() { return product(mul2(), identity(1)); }

}  // namespace

TEST(Image, Examples) {
    EXPECT_EQ(image(plus_one(), unary({1, 2, 3})), unary({2, 3, 4}));
    EXPECT_EQ(image(add2(), box_tuples(Box{{1, 3}, {1, 3}})), range1(2, 6));
    EXPECT_TRUE(image(plus_one(), TupleSet(1)).empty());
    EXPECT_THROW(image(plus_one(), TupleSet(2, {{1, 2}})), std::invalid_argument);
}

TEST(Preimage, Examples) {
    EXPECT_EQ(preimage(plus_one(), unary({2, 3, 4}), Box{{0, 10}}), unary({1, 2, 3}));
    auto sq = scalar(1, [](const Tuple& t) { return t[0] * t[0]; });
    EXPECT_EQ(preimage(sq, unary({4}), Box{{-5, 5}}), unary({-2, 2}));
    EXPECT_TRUE(preimage(sq, TupleSet(1), Box{{-5, 5}}).empty());
    EXPECT_THROW(preimage(sq, unary({4}), Box{{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST(ContractingObject, Examples) {
    TupleSet d = box_tuples(Box{{1, 3}, {1, 3}});
    EXPECT_EQ(contracting_object(add2(), range1(2, 6), d), d);
    EXPECT_EQ(contracting_object(add2(), unary({2}), d), TupleSet(2, {{1, 1}}));
    EXPECT_TRUE(contracting_object(add2(), TupleSet(1), d).empty());
}

TEST(ExactFixpoint, Examples) {
    TupleSet s(2, {{3, 3}, {9, 6}});
    EXPECT_EQ(exact_fixpoint(equal2(), s), TupleSet(2, {{3, 3}}));
    TupleSet sol(2, {{1, 1}, {4, 4}});
    EXPECT_EQ(exact_fixpoint(equal2(), sol), sol);
    EXPECT_TRUE(exact_fixpoint(equal2(), TupleSet(2, {{0, 1}, {2, 1}})).empty());
}

TEST(PhiPsiBound, TaxonomyZProjection) {
    TupleSet s = cartesian({{0, 1}, {0}, {0, 1, 2}});
    TupleSet dd = phi_psi_bound(lin23(), s, ApproxKind::Delta, ApproxKind::Delta);
    EXPECT_EQ(dd.projection(2), (std::set<Int>{0, 2}));
    TupleSet db = phi_psi_bound(lin23(), s, ApproxKind::Delta, ApproxKind::Beta);
    EXPECT_EQ(db.projection(2), (std::set<Int>{0, 1, 2}));
    EXPECT_THROW(phi_psi_bound(lin23(), s, ApproxKind::RhoLinear, ApproxKind::Beta), UnsupportedKind);
}

TEST(PhiPsiBound, UniversalConstraintKeepsApproximation) {
    ConstraintExt all{2, [](const Tuple&) { return true; }};
    TupleSet s(2, {{0, 0}, {2, 3}});
    TupleSet b = phi_psi_bound(all, s, ApproxKind::Delta, ApproxKind::Beta);
    EXPECT_TRUE(s.subset_of(b));
    EXPECT_EQ(b, box_tuples(Box{{0, 2}, {0, 3}}));
}

TEST(ViewPropagate, SumThenProjection) {
    FuncSpec f = product(add2(), identity(1));
    TupleSet s(3, {{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(view_propagate(equal2(), f, s), TupleSet(3, {{1, 2, 3}}));
    TupleSet sol(3, {{1, 2, 3}, {0, 0, 0}});
    EXPECT_EQ(view_propagate(equal2(), f, sol), sol);
    EXPECT_TRUE(view_propagate(equal2(), f, TupleSet(3, {{1, 1, 5}})).empty());
}

TEST(BoxViewPropagate, IdempotentInnerReachesTenToFourteen) {
    TupleSet s = box_tuples(Box{{2, 3}, {2, 3}, {9, 15}});
    TupleSet r = box_view_propagate_ref(double_eq(), mul_times_id(), s, true);
    EXPECT_EQ(r, box_tuples(Box{{2, 3}, {2, 3}, {10, 14}}));
}

TEST(BoxViewPropagate, SinglePassPrunesNothing) {
    TupleSet s = box_tuples(Box{{2, 3}, {2, 3}, {9, 15}});
    TupleSet r = box_view_propagate_ref(double_eq(), mul_times_id(), s, false, single_pass_scaled_eq(2));
    EXPECT_EQ(r, s);
    EXPECT_THROW(box_view_propagate_ref(double_eq(), mul_times_id(), s, false), std::invalid_argument);
}

TEST(BoxViewPropagate, SingletonSolutionUnchanged) {
    TupleSet s(3, {{2, 3, 12}});
    EXPECT_EQ(box_view_propagate_ref(double_eq(), mul_times_id(), s, true), s);
}

TEST(BoxViewPropagate, IdempotentWithinSinglePassAndSound) {
    ConstraintExt composed = compose(double_eq(), mul_times_id());
    bool strict = false;
    for (Int a = 0; a <= 3; ++a)
        for (Int b = a; b <= 3; ++b)
            for (Int zl = 0; zl <= 18; zl += 3)
                for (Int zh = zl; zh <= 18; zh += 2) {
                    TupleSet s = box_tuples(Box{{a, b}, {1, 3}, {zl, zh}});
                    TupleSet strong = box_view_propagate_ref(double_eq(), mul_times_id(), s, true);
                    TupleSet weak =
                        box_view_propagate_ref(double_eq(), mul_times_id(), s, false, single_pass_scaled_eq(2));
                    ASSERT_TRUE(strong.subset_of(weak));
                    ASSERT_TRUE(exact_fixpoint(composed, s).subset_of(strong));
                    strict = strict || strong != weak;
                }
    EXPECT_TRUE(strict);
}

TEST(OracleProperties, RoundTripAtIdentityPrecision) {
    std::vector<FuncSpec> fs{plus_one(), scalar(1, [](const Tuple& t) { return t[0] * t[0]; })};
    for (const auto& f : fs)
        for (unsigned mask = 1; mask < 16; ++mask) {
            TupleSet s(1);
            for (Int v = 0; v < 4; ++v)
                if (mask & (1u << v)) s.insert({v});
            EXPECT_EQ(contracting_object(f, image(f, s), s), s);
        }
    // arity 2 and 3 over sub-boxes
    for (const auto& sub : oracle::detail::sub_intervals(Interval{0, 3}))
        for (const auto& sub2 : oracle::detail::sub_intervals(Interval{0, 3})) {
            TupleSet s2 = box_tuples(Box{sub, sub2});
            EXPECT_EQ(contracting_object(mul2(), image(mul2(), s2), s2), s2);
            TupleSet s3 = box_tuples(Box{sub, sub2, {0, 3}});
            FuncSpec f3 = scalar(3, [](const Tuple& t) { return t[0] - t[1] * t[2]; });
            EXPECT_EQ(contracting_object(f3, image(f3, s3), s3), s3);
        }
}

TEST(OracleProperties, ViewPropagateEqualsDirectPropagation) {
    FuncSpec f = product(add2(), identity(1));
    ConstraintExt composed = compose(equal2(), f);
    Box u{{0, 2}, {0, 2}, {0, 3}};
    TupleSet all = box_tuples(u);
    std::vector<Tuple> ts(all.begin(), all.end());
    std::mt19937_64 rng(5);
    for (int k = 0; k < 500; ++k) {
        TupleSet s(3);
        for (const auto& t : ts)
            if (rng() % 3 == 0) s.insert(t);
        ASSERT_EQ(view_propagate(equal2(), f, s), exact_fixpoint(composed, s));
    }
}

TEST(RhoBoxLinear, Examples) {
    Box b{{0, 1}, {0, 1}, {1, 3}};
    Box r = rho_box_linear({2, 3, -1}, 0, b);
    EXPECT_EQ(r[2], Interval(1, 3));
    EXPECT_EQ(r, b);
    TupleSet bb = phi_psi_bound(lin23(), box_tuples(b), ApproxKind::Beta, ApproxKind::Beta);
    EXPECT_EQ(beta_approx(bb), (Box{{0, 1}, {0, 1}, {2, 3}}));
    Box single{{1, 1}, {1, 1}, {5, 5}};
    EXPECT_EQ(rho_box_linear({2, 3, -1}, 0, single), single);
}

TEST(RhoBoxLinear, RoundsInwardAndDetectsEmpty) {
    // 2x = 3 over [0..5] has real solution 1.5 only
    EXPECT_TRUE(rho_box_linear({2}, 3, Box{{0, 5}}).empty());
    EXPECT_TRUE(rho_box_linear({1, 1}, 20, Box{{0, 5}, {0, 5}}).empty());
    EXPECT_EQ(rho_box_linear({1, 1}, 8, Box{{0, 5}, {0, 5}}), (Box{{3, 5}, {3, 5}}));
    EXPECT_EQ(rho_box_linear({-2, 1}, 0, Box{{0, 5}, {0, 3}}), (Box{{0, 1}, {0, 3}}));
}

TEST(RhoBoxLinear, ContainsBetaBetaBound) {
    for (Int zl = 0; zl <= 5; ++zl)
        for (Int zh = zl; zh <= 5; ++zh) {
            Box b{{0, 1}, {0, 1}, {zl, zh}};
            Box rho = rho_box_linear({2, 3, -1}, 0, b);
            Box bb = beta_approx(phi_psi_bound(lin23(), box_tuples(b), ApproxKind::Beta, ApproxKind::Beta));
            EXPECT_TRUE(rho.contains(bb)) << b;
        }
}

TEST(CheckPropagator, EngineSumEqIsBetaBetaComplete) {
    ConstraintExt c{3, [](const Tuple& t) { return t[0] + t[1] == t[2]; }};
    auto p = engine_propagator([](Store& s, const std::vector<VarId>& v) {
        s.add(sum_eq(std::vector<Var>{Var(s, v[0]), Var(s, v[1])}, Var(s, v[2])));
    });
    CheckReport rep = check_propagator("sum_eq", p, c, ApproxKind::Beta, ApproxKind::Beta, Box{{0, 4}, {0, 4}, {0, 4}});
    EXPECT_TRUE(rep.contracting);
    EXPECT_TRUE(rep.sound);
    EXPECT_TRUE(rep.complete) << rep.counterexample;
    EXPECT_TRUE(rep.exhaustive);
    EXPECT_EQ(rep.cases, 15u * 15u * 15u);
}

TEST(CheckPropagator, IdentityIsIncomplete) {
    PropagatorSpec id = [](const TupleSet& s) { return s; };
    CheckReport rep = check_propagator("identity", id, lin23(), ApproxKind::Delta, ApproxKind::Delta,
                                       Box{{0, 1}, {0, 1}, {0, 3}});
    EXPECT_TRUE(rep.contracting);
    EXPECT_TRUE(rep.sound);
    EXPECT_FALSE(rep.complete);
    EXPECT_FALSE(rep.counterexample.empty());
}

TEST(CheckPropagator, EmptyResultIsUnsound) {
    PropagatorSpec none = [](const TupleSet& s) { return TupleSet(s.arity()); };
    CheckReport rep = check_propagator("empty", none, equal2(), ApproxKind::Beta, ApproxKind::Beta, Box{{0, 2}, {0, 2}});
    EXPECT_TRUE(rep.contracting);
    EXPECT_FALSE(rep.sound);
    EXPECT_FALSE(rep.ok(false));
    EXPECT_NE(rep.counterexample.find("unsound"), std::string::npos);
}

TEST(CheckPropagator, GrowingResultIsNotContracting) {
    Box u{{0, 2}, {0, 2}};
    PropagatorSpec grow = [u](const TupleSet&) { return box_tuples(u); };
    CheckReport rep = check_propagator("grow", grow, equal2(), ApproxKind::Beta, ApproxKind::Beta, u);
    EXPECT_FALSE(rep.contracting);
}

TEST(CheckPropagator, EnginePropagatorRejectsHoles) {
    auto p = engine_propagator([](Store& s, const std::vector<VarId>& v) { s.add(eq(Var(s, v[0]), Var(s, v[1]))); });
    EXPECT_THROW(p(TupleSet(2, {{0, 0}, {2, 2}})), std::invalid_argument);
}

TEST(FuncSpec, ConstructorsAndArity) {
    FuncSpec f = pairing({projection(3, 2), scalar(3, [](const Tuple& t) { return t[0] + t[1]; })});
    EXPECT_EQ(f(Tuple{1, 2, 3}), (Tuple{3, 3}));
    EXPECT_THROW(f(Tuple{1, 2}), std::invalid_argument);
    EXPECT_THROW(compose(add2(), identity(3)), std::invalid_argument);
    EXPECT_THROW(projection(2, 2), std::out_of_range);
    FuncSpec g = compose(plus_one(), add2());
    EXPECT_EQ(g(Tuple{2, 3}), (Tuple{6}));
}
