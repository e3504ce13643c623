#pragma once

// Verification suites driven by the tuple-set oracle. Shared by the `verify`
// subcommand and the acceptance binary. Requires nlohmann/json.

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxview/decompose.hpp"
#include "boxview/models.hpp"
#include "boxview/oracle.hpp"
#include "boxview/view_node.hpp"

namespace boxview::verify {

using json = nlohmann::ordered_json;

struct Options {
    int exhaustive_bound = 5;  // values [0..b-1] for law checks, [-b..b] for view conformance
    std::uint64_t seed = 1;
    std::size_t random_cases = 10'000;
    std::string inject_fault;  // "mul": off-by-one inverse in the product view
};

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::vector<std::string> failures;
    std::vector<json> records;
    double time_ms = 0;

    bool passed() const { return failures.empty(); }
    void fail(std::string what) {
        if (failures.size() < 20) failures.push_back(std::move(what));
        else if (failures.size() == 20) failures.push_back("...");
    }
    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) fail(what);
    }
};

namespace detail {

inline std::string str(const TupleSet& s) { return oracle::detail::describe(s); }

inline std::string str(const Box& b) {
    std::ostringstream os;
    os << b;
    return os.str();
}

template <class F>
SuiteResult timed(const std::string& name, F&& body) {
    SuiteResult r;
    r.name = name;
    auto t0 = std::chrono::steady_clock::now();
    body(r);
    r.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline TupleSet random_set(SeededRng& rng, const Box& universe) {
    TupleSet s(universe.arity());
    Int density = rng.uniform(1, 9);
    for (const auto& t : box_tuples(universe))
        if (rng.uniform(0, 9) < density) s.insert(t);
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Approximation laws

inline void check_laws_on(SuiteResult& r, const TupleSet& s) {
    static constexpr ApproxKind kinds[] = {ApproxKind::Identity, ApproxKind::Delta, ApproxKind::Beta};
    for (ApproxKind k : kinds) {
        TupleSet a = approx(s, k);
        r.expect(approx(a, k) == a, std::string("idempotency ") + to_string(k) + " on " + detail::str(s));
    }
    TupleSet d = delta_approx(s);
    TupleSet b = box_tuples(beta_approx(s));
    r.expect(s.subset_of(d) && d.subset_of(b), "containment chain on " + detail::str(s));
}

inline void check_pair_laws(SuiteResult& r, const TupleSet& s, const TupleSet& t) {
    static constexpr ApproxKind kinds[] = {ApproxKind::Identity, ApproxKind::Delta, ApproxKind::Beta};
    for (ApproxKind k : kinds) {
        TupleSet as = approx(s, k), at = approx(t, k);
        if (s.subset_of(t))
            r.expect(as.subset_of(at), std::string("monotonicity ") + to_string(k) + " on " + detail::str(s));
        r.expect(is_phi_domain(as.intersect(at), k),
                 std::string("intersection closure ") + to_string(k) + " on " + detail::str(s));
    }
}

inline std::vector<Box> law_universes(int b) {
    std::vector<Box> out;
    for (std::size_t n = 1; n <= 3; ++n) out.emplace_back(std::vector<Interval>(n, Interval{0, b - 1}));
    return out;
}

inline SuiteResult approx_laws(const Options& opt) {
    return detail::timed("approx-laws", [&](SuiteResult& r) {
        SeededRng rng(opt.seed);
        std::size_t exhaustive_sets = 0;
        // Every subset of every universe small enough to enumerate; all pairs where cheap.
        for (std::size_t n = 1; n <= 3; ++n) {
            for (int v = 1; v <= opt.exhaustive_bound; ++v) {
                Box u(std::vector<Interval>(n, Interval{0, v - 1}));
                TupleSet all = box_tuples(u);
                std::vector<Tuple> ts(all.begin(), all.end());
                if (ts.size() > 16) continue;
                std::vector<TupleSet> sets;
                for (std::uint32_t mask = 0; mask < (1u << ts.size()); ++mask) {
                    TupleSet s(n);
                    for (std::size_t i = 0; i < ts.size(); ++i)
                        if (mask & (1u << i)) s.insert(ts[i]);
                    check_laws_on(r, s);
                    ++exhaustive_sets;
                    if (ts.size() <= 8) sets.push_back(std::move(s));
                }
                for (const auto& s : sets)
                    for (const auto& t : sets) check_pair_laws(r, s, t);
            }
        }
        // Randomized sets and nested pairs over the full grid.
        std::size_t sampled = 0;
        for (const Box& u : law_universes(opt.exhaustive_bound)) {
            for (std::size_t c = 0; c < opt.random_cases; ++c) {
                TupleSet s = detail::random_set(rng, u);
                TupleSet t = s.unite(detail::random_set(rng, u)).unite(detail::random_set(rng, u));
                check_laws_on(r, s);
                check_pair_laws(r, s, t);
                check_pair_laws(r, s, detail::random_set(rng, u));
                ++sampled;
            }
        }
        // Non-distributivity: a cross and its transpose have disjoint
        // intersection but identical approximations.
        TupleSet s1(2, {{0, 0}, {1, 1}}), s2(2, {{0, 1}, {1, 0}});
        for (ApproxKind k : {ApproxKind::Delta, ApproxKind::Beta}) {
            TupleSet lhs = approx(s1, k).intersect(approx(s2, k));
            TupleSet rhs = approx(s1.intersect(s2), k);
            r.expect(!(lhs == rhs), std::string("non-distributivity witness ") + to_string(k));
            r.records.push_back({{"witness", "non-distributivity"},
                                 {"kind", to_string(k)},
                                 {"s1", detail::str(s1)},
                                 {"s2", detail::str(s2)},
                                 {"approx_meet", detail::str(lhs)},
                                 {"approx_of_meet", detail::str(rhs)}});
        }
        r.records.push_back({{"exhaustive_sets", exhaustive_sets}, {"sampled_sets", sampled}});
    });
}

// ---------------------------------------------------------------------------
// Completeness taxonomy on c = [2x + 3y = z]

struct TaxonomyEdge {
    std::string stronger, weaker;  // class labels
    std::vector<std::vector<Int>> domain;
    std::size_t var;
    Int value;
};

inline const char* class_label(ApproxKind phi, ApproxKind psi) {
    if (phi == ApproxKind::Delta && psi == ApproxKind::Delta) return "domain";
    if (phi == ApproxKind::Delta && psi == ApproxKind::Beta) return "bounds(D)";
    if (phi == ApproxKind::Beta && psi == ApproxKind::Delta) return "range";
    if (phi == ApproxKind::Beta && psi == ApproxKind::Beta) return "bounds(Z)";
    return "?";
}

inline oracle::ConstraintExt taxonomy_constraint() {
    return {3, [](const Tuple& t) { return 2 * t[0] + 3 * t[1] == t[2]; }};
}

/// Projection of the class's propagation result on one variable. The
/// "bounds(R)" class is the real relaxation.
inline std::set<Int> taxonomy_projection(const std::string& cls, const TupleSet& s, std::size_t var) {
    static const std::map<std::string, std::pair<ApproxKind, ApproxKind>> kinds = {
        {"domain", {ApproxKind::Delta, ApproxKind::Delta}},
        {"bounds(D)", {ApproxKind::Delta, ApproxKind::Beta}},
        {"range", {ApproxKind::Beta, ApproxKind::Delta}},
        {"bounds(Z)", {ApproxKind::Beta, ApproxKind::Beta}}};
    if (cls == "bounds(R)") {
        Box b = oracle::rho_box_linear({2, 3, -1}, 0, beta_approx(s));
        std::set<Int> out;
        for (Int v = b[var].lo; v <= b[var].hi; ++v)
            if (s.projection(var).count(v)) out.insert(v);
        return out;
    }
    auto [phi, psi] = kinds.at(cls);
    // A propagator result never leaves s, so compare within s's projection.
    std::set<Int> out;
    auto p = oracle::phi_psi_bound(taxonomy_constraint(), s, phi, psi).projection(var);
    for (Int v : s.projection(var))
        if (p.count(v)) out.insert(v);
    return out;
}

inline std::vector<TaxonomyEdge> taxonomy_edges() {
    return {
        {"domain", "bounds(D)", {{0, 1}, {0}, {0, 1, 2}}, 2, 1},
        {"domain", "range", {{0, 1}, {0, 1}, {0, 3}}, 0, 1},
        {"bounds(D)", "bounds(Z)", {{0, 1}, {0, 1}, {0, 3}}, 0, 1},
        {"range", "bounds(Z)", {{0}, {0, 1}, {0, 2, 3}}, 2, 2},
        {"bounds(Z)", "bounds(R)", {{0, 1}, {0, 1}, {1, 2, 3}}, 2, 1},
        {"range", "bounds(D)", {{0}, {0, 1}, {0, 1, 3}}, 2, 1},
        {"bounds(D)", "range", {{0, 1}, {0, 1}, {0, 3}}, 0, 1},
    };
}

inline SuiteResult taxonomy(const Options&) {
    return detail::timed("taxonomy", [&](SuiteResult& r) {
        static const char* names[] = {"x", "y", "z"};
        for (const auto& e : taxonomy_edges()) {
            TupleSet s = cartesian(e.domain);
            bool pruned = !taxonomy_projection(e.stronger, s, e.var).count(e.value);
            bool kept = taxonomy_projection(e.weaker, s, e.var).count(e.value) > 0;
            std::string label = e.stronger + " > " + e.weaker;
            r.expect(pruned && kept, label + ": " + names[e.var] + "=" + std::to_string(e.value));
            r.records.push_back({{"edge", label},
                                 {"domain", detail::str(s)},
                                 {"value", std::string(names[e.var]) + "=" + std::to_string(e.value)},
                                 {"pruned_by_stronger", pruned},
                                 {"kept_by_weaker", kept}});
        }
        // The real relaxation keeps z=1 because <0.5, 0, 1> is a real solution.
        Box b = oracle::rho_box_linear({2, 3, -1}, 0, Box({{0, 1}, {0, 1}, {1, 3}}));
        r.expect(b == Box({{0, 1}, {0, 1}, {1, 3}}), "real relaxation box " + detail::str(b));
        Box bz = beta_approx(oracle::phi_psi_bound(taxonomy_constraint(), box_tuples(Box({{0, 1}, {0, 1}, {1, 3}})),
                                                   ApproxKind::Beta, ApproxKind::Beta));
        r.expect(bz == Box({{0, 1}, {0, 1}, {2, 3}}), "integer bounds box " + detail::str(bz));
    });
}

// ---------------------------------------------------------------------------
// View / oracle conformance

/// Product view with an off-by-one inverse, used to check that the harness
/// reports unsound updates.
template <BoxView X, BoxView Y>
class FaultyMul : public Mul<X, Y> {
public:
    using Mul<X, Y>::Mul;
    bool upd_max(Int i) const { return Mul<X, Y>::upd_max(i - 1); }
};

using ViewBuilder = std::function<DynBox(const ViewNode&, Store&)>;

inline ViewBuilder static_builder() {
    return [](const ViewNode& n, Store& s) { return make_dyn(build_static(n, s), contains_ite(n)); };
}

inline ViewBuilder dynamic_builder(const std::string& fault = {}) {
    return [fault](const ViewNode& n, Store& s) {
        if (fault == "mul" && n.kind == NodeKind::Mul)
            return make_dyn(FaultyMul<DynBox, DynBox>(build_dynamic(n.kids[0], s), build_dynamic(n.kids[1], s)));
        return build_dynamic(n, s);
    };
}

struct KindCase {
    NodeKind kind;
    std::size_t children;
    Int value = 0;
};

inline std::vector<KindCase> conformance_kinds() {
    std::vector<KindCase> out;
    for (NodeKind k : kAllKinds) {
        if (k == NodeKind::Var || k == NodeKind::Const) continue;
        if (k == NodeKind::LinearTerm) {
            for (Int a : {-3, -1, 2, 3}) out.push_back({k, 1, a});
        } else if (k == NodeKind::Sum) {
            out.push_back({k, 2});
            out.push_back({k, 3});
        } else {
            out.push_back({k, static_cast<std::size_t>(arity(k))});
        }
    }
    return out;
}

/// Compares one realization against the oracle on one child box: bounds equal
/// the image hull; each upd_min/upd_max keeps every supporting tuple and never
/// widens a child.
inline void conform_box(SuiteResult& r, const KindCase& kc, const Box& children, const ViewBuilder& build,
                        const std::string& realization) {
    Store s;
    std::vector<ViewNode> kids;
    for (std::size_t i = 0; i < kc.children; ++i) {
        VarId v = s.new_var(children[i].lo, children[i].hi);
        kids.push_back(vn::var(s, v));
    }
    ViewNode node = vn::node(kc.kind, kids, kc.value);
    DynBox view = build(node, s);

    // Tuples sorted by value: preimages of [i..] and [..i] are suffixes and prefixes.
    std::vector<std::pair<Int, Tuple>> tv;
    for (const auto& t : box_tuples(children))
        tv.emplace_back(evaluate(node, [&](VarId v) { return t[v.index]; }), t);
    std::sort(tv.begin(), tv.end());
    const std::size_t n = kc.children;
    std::vector<Box> prefix_hull(tv.size()), suffix_hull(tv.size());
    auto grow = [&](Box acc, const Tuple& t) {
        std::vector<Interval> d;
        for (std::size_t i = 0; i < n; ++i) d.push_back(acc[i].hull(Interval::singleton(t[i])));
        return Box(std::move(d));
    };
    for (std::size_t i = 0; i < tv.size(); ++i)
        prefix_hull[i] = grow(i ? prefix_hull[i - 1] : Box::empty_box(n), tv[i].second);
    for (std::size_t i = tv.size(); i-- > 0;)
        suffix_hull[i] = grow(i + 1 < tv.size() ? suffix_hull[i + 1] : Box::empty_box(n), tv[i].second);

    Interval hull{tv.front().first, tv.back().first};
    auto where = [&]() {
        return realization + " " + tag(kc.kind) + (kc.value ? " " + std::to_string(kc.value) : "") + " on " +
               detail::str(children);
    };
    ++r.checks;
    if (view.get_min() != hull.lo || view.get_max() != hull.hi) {
        r.fail("bounds " + where() + ": got [" + std::to_string(view.get_min()) + ".." +
               std::to_string(view.get_max()) + "] expected " + detail::str(Box({hull})));
    }

    auto current = [&]() {
        std::vector<Interval> d;
        for (std::size_t i = 0; i < n; ++i) d.push_back(s.domain(VarId{static_cast<int>(i)}));
        return Box(std::move(d));
    };
    for (Int i = hull.lo - 1; i <= hull.hi + 1; ++i) {
        for (int dir = 0; dir < 2; ++dir) {
            // Support of the update: tuples with value >= i (upd_min) or <= i (upd_max).
            Box need = Box::empty_box(n);
            if (dir == 0) {
                auto it = std::lower_bound(tv.begin(), tv.end(), i, [](const auto& p, Int v) { return p.first < v; });
                if (it != tv.end()) need = suffix_hull[it - tv.begin()];
            } else {
                auto it = std::upper_bound(tv.begin(), tv.end(), i, [](Int v, const auto& p) { return v < p.first; });
                if (it != tv.begin()) need = prefix_hull[it - tv.begin() - 1];
            }
            s.push();
            bool ok = dir == 0 ? view.upd_min(i) : view.upd_max(i);
            Box got = ok && !s.failed() ? current() : Box::empty_box(n);
            s.pop();
            ++r.checks;
            bool sound = need.empty() || (ok && got.contains(need));
            bool contracting = got.empty() || children.contains(got);
            if (!sound || !contracting) {
                r.fail(std::string(sound ? "widening " : "unsound ") + (dir == 0 ? "upd_min(" : "upd_max(") +
                       std::to_string(i) + ") " + where() + ": got " + detail::str(got) + " must keep " +
                       detail::str(need));
                r.records.push_back({{"counterexample", r.failures.back()}});
            }
        }
    }
}

inline std::vector<Interval> sub_intervals(Int lo, Int hi) { return oracle::detail::sub_intervals(Interval{lo, hi}); }

inline SuiteResult view_conformance(const Options& opt) {
    return detail::timed("view-conformance", [&](SuiteResult& r) {
        const Int b = opt.exhaustive_bound;
        auto ivs = sub_intervals(-b, b);
        std::vector<std::pair<std::string, ViewBuilder>> builders = {{"static", static_builder()},
                                                                     {"dynamic", dynamic_builder(opt.inject_fault)}};
        for (const auto& kc : conformance_kinds()) {
            // Conditions of if-then-else range over [-1..2] to cover both truth values.
            std::vector<std::vector<Interval>> per(kc.children, ivs);
            if (kc.kind == NodeKind::IfThenElse) per[0] = sub_intervals(-1, 2);
            std::vector<std::size_t> pick(kc.children, 0);
            std::size_t boxes = 0;
            while (true) {
                std::vector<Interval> d;
                for (std::size_t i = 0; i < kc.children; ++i) d.push_back(per[i][pick[i]]);
                Box box(d);
                for (const auto& [name, build] : builders) conform_box(r, kc, box, build, name);
                ++boxes;
                std::size_t k = 0;
                while (k < kc.children && ++pick[k] == per[k].size()) pick[k++] = 0;
                if (k == kc.children) break;
            }
            r.records.push_back({{"kind", tag(kc.kind)}, {"value", kc.value}, {"boxes", boxes}});
        }
    });
}

// ---------------------------------------------------------------------------
// Box view propagation example: [2 * x1 * x2 = x3] on [2..3]^2 x [9..15]

inline SuiteResult box_view_example(const Options&) {
    return detail::timed("box-view-example", [&](SuiteResult& r) {
        for (ModelVariant v : kAllVariants) {
            if (!uses_views(v)) continue;
            Store s;
            VarId x1 = s.new_var(2, 3, "x1"), x2 = s.new_var(2, 3, "x2"), x3 = s.new_var(9, 15, "x3");
            Decomposer dec(s, v);
            dec.post(rel::eq(vn::lin(2, vn::mul(vn::var(s, x1), vn::var(s, x2))), vn::var(s, x3)));
            bool ok = s.fixpoint();
            Box got({s.domain(x1), s.domain(x2), s.domain(x3)});
            r.expect(ok && got == Box({{2, 3}, {2, 3}, {10, 14}}),
                     std::string("engine ") + to_string(v) + ": " + detail::str(got));
            r.records.push_back({{"source", std::string("engine ") + to_string(v)}, {"result", detail::str(got)}});
        }
        oracle::ConstraintExt c{2, [](const Tuple& t) { return 2 * t[0] == t[1]; }};
        auto f = oracle::func(3, 2, [](const Tuple& t) { return Tuple{t[0] * t[1], t[2]}; });
        TupleSet d = box_tuples(Box({{2, 3}, {2, 3}, {9, 15}}));
        Box idem = beta_approx(oracle::box_view_propagate_ref(c, f, d, true));
        Box single = beta_approx(oracle::box_view_propagate_ref(c, f, d, false, oracle::single_pass_scaled_eq(2)));
        r.expect(idem == Box({{2, 3}, {2, 3}, {10, 14}}), "oracle idempotent inner: " + detail::str(idem));
        r.expect(single == Box({{2, 3}, {2, 3}, {9, 15}}), "oracle single-pass inner: " + detail::str(single));
        r.records.push_back({{"source", "oracle idempotent inner"}, {"result", detail::str(idem)}});
        r.records.push_back({{"source", "oracle single-pass inner"}, {"result", detail::str(single)}});
    });
}

// ---------------------------------------------------------------------------
// Propagator completeness matrix

struct MatrixRow {
    std::string name;
    oracle::ConstraintExt c;
    std::function<void(Store&, const std::vector<VarId>&)> post;
    Box universe;
    bool need_complete = true;
};

inline std::vector<MatrixRow> matrix_rows() {
    auto vars = [](Store& s, const std::vector<VarId>& v) {
        std::vector<Var> out;
        for (VarId x : v) out.emplace_back(s, x);
        return out;
    };
    auto cube = [](std::size_t n, Int lo, Int hi) { return Box(std::vector<Interval>(n, Interval{lo, hi})); };
    std::vector<MatrixRow> rows;
    rows.push_back({"eq",
                    {2, [](const Tuple& t) { return t[0] == t[1]; }},
                    [](Store& s, const std::vector<VarId>& v) { s.add(eq(Var(s, v[0]), Var(s, v[1]))); },
                    cube(2, 0, 4)});
    rows.push_back({"eq-view",
                    {3, [](const Tuple& t) { return t[0] + t[1] == t[2]; }},
                    [](Store& s, const std::vector<VarId>& v) {
                        s.add(eq(Add<Var, Var>(Var(s, v[0]), Var(s, v[1])), Var(s, v[2])));
                    },
                    cube(3, 0, 4)});
    rows.push_back({"leq",
                    {2, [](const Tuple& t) { return t[0] <= t[1]; }},
                    [](Store& s, const std::vector<VarId>& v) { s.add(leq(Var(s, v[0]), Var(s, v[1]))); },
                    cube(2, 0, 4)});
    rows.push_back({"neq",
                    {1, [](const Tuple& t) { return t[0] != 2; }},
                    [](Store& s, const std::vector<VarId>& v) { s.add(neq(Var(s, v[0]), 2)); },
                    cube(1, 0, 4)});
    rows.push_back({"sum_eq",
                    {3, [](const Tuple& t) { return t[0] + t[1] == t[2]; }},
                    [vars](Store& s, const std::vector<VarId>& v) {
                        auto xs = vars(s, v);
                        s.add(sum_eq(std::vector<Var>{xs[0], xs[1]}, xs[2]));
                    },
                    cube(3, 0, 4)});
    rows.push_back({"sum_eq-4",
                    {4, [](const Tuple& t) { return t[0] + t[1] + t[2] == t[3]; }},
                    [vars](Store& s, const std::vector<VarId>& v) {
                        auto xs = vars(s, v);
                        s.add(sum_eq(std::vector<Var>{xs[0], xs[1], xs[2]}, xs[3]));
                    },
                    cube(4, 0, 4)});
    rows.push_back({"linear_eq",
                    {3, [](const Tuple& t) { return 2 * t[0] + 3 * t[1] - t[2] == 0; }},
                    [vars](Store& s, const std::vector<VarId>& v) { s.add(linear_eq({2, 3, -1}, vars(s, v), 0)); },
                    cube(3, 0, 4)});
    rows.push_back({"linear_eq-4",
                    {4, [](const Tuple& t) { return 3 * t[0] - 2 * t[1] + t[2] - 2 * t[3] == 1; }},
                    [vars](Store& s, const std::vector<VarId>& v) {
                        s.add(linear_eq({3, -2, 1, -2}, vars(s, v), 1));
                    },
                    cube(4, 0, 4)});
    rows.push_back({"distinct_bounds",
                    {3, [](const Tuple& t) { return t[0] != t[1] && t[0] != t[2] && t[1] != t[2]; }},
                    [vars](Store& s, const std::vector<VarId>& v) { s.add(distinct_bounds(vars(s, v))); },
                    cube(3, 0, 4)});
    rows.push_back({"distinct_bounds-4",
                    {4,
                     [](const Tuple& t) {
                         for (std::size_t i = 0; i < 4; ++i)
                             for (std::size_t j = i + 1; j < 4; ++j)
                                 if (t[i] == t[j]) return false;
                         return true;
                     }},
                    [vars](Store& s, const std::vector<VarId>& v) { s.add(distinct_bounds(vars(s, v))); },
                    cube(4, 0, 4)});
    rows.push_back({"mul_eq",
                    {3, [](const Tuple& t) { return t[0] * t[1] == t[2]; }},
                    [](Store& s, const std::vector<VarId>& v) {
                        s.add(mul_eq(Var(s, v[0]), Var(s, v[1]), Var(s, v[2])));
                    },
                    Box({{-2, 2}, {-2, 2}, {-4, 4}}),
                    false});
    return rows;
}

inline json report_json(const oracle::CheckReport& rep) {
    return {{"name", rep.name},
            {"phi", to_string(rep.phi)},
            {"psi", to_string(rep.psi)},
            {"contracting", rep.contracting},
            {"sound", rep.sound},
            {"complete", rep.complete},
            {"counterexample", rep.counterexample}};
}

inline SuiteResult completeness_matrix(const Options& opt) {
    return detail::timed("completeness-matrix", [&](SuiteResult& r) {
        oracle::CheckOptions co;
        co.seed = opt.seed;
        for (const auto& row : matrix_rows()) {
            auto rep = oracle::check_propagator(row.name, oracle::engine_propagator(row.post), row.c,
                                                ApproxKind::Beta, ApproxKind::Beta, row.universe, co);
            r.checks += rep.cases;
            if (!rep.ok(row.need_complete)) r.fail(row.name + ": " + rep.counterexample);
            json j = report_json(rep);
            j["exhaustive"] = rep.exhaustive;
            j["cases"] = rep.cases;
            j["requires_complete"] = row.need_complete;
            r.records.push_back(std::move(j));
        }
    });
}

// ---------------------------------------------------------------------------
// Idempotency-status audit

namespace detail {

/// A random propagator over random small domains. Returns the store's
/// propagator under test via the last added id.
inline std::string random_case(SeededRng& rng, Store& s) {
    auto dom = [&](Int lo, Int hi) {
        Int a = rng.uniform(lo, hi), b = rng.uniform(lo, hi);
        return s.new_var(std::min(a, b), std::max(a, b));
    };
    auto vars = [&](int n, Int lo, Int hi) {
        std::vector<Var> out;
        for (int i = 0; i < n; ++i) out.emplace_back(s, dom(lo, hi));
        return out;
    };
    switch (rng.uniform(0, 10)) {
        case 0: {
            auto x = vars(2, -4, 4);
            s.add(eq(x[0], x[1]));
            return "eq";
        }
        case 1: {
            auto x = vars(3, -4, 4);
            s.add(eq(Mul<Var, Var>(x[0], x[1]), x[2]));
            return "eq-mul";
        }
        case 2: {
            auto x = vars(3, -3, 3);
            s.add(eq(Abs<Sub<Var, Var>>(Sub<Var, Var>(x[0], x[1])), Lin<Var>(2, x[2])));
            return "eq-abs";
        }
        case 3: {
            auto x = vars(2, -4, 4);
            s.add(leq(Sqr<Var>(x[0]), x[1]));
            return "leq-sqr";
        }
        case 4: {
            auto x = vars(2, -1, 3);
            s.add(neq(Add<Var, Var>(x[0], x[1]), rng.uniform(0, 5)));
            return "neq-add";
        }
        case 5: {
            auto x = vars(1, -2, 2);
            s.add(neq(x[0], rng.uniform(-2, 2)));
            return "neq";
        }
        case 6: {
            auto x = vars(4, -3, 5);
            s.add(sum_eq(std::vector<Var>{x[0], x[1], x[2]}, x[3]));
            return "sum_eq";
        }
        case 7: {
            auto x = vars(3, -3, 4);
            std::vector<Int> co{rng.uniform(1, 3), -rng.uniform(1, 3), rng.uniform(-3, 3) | 1};
            s.add(linear_eq(co, x, rng.uniform(-3, 3)));
            return "linear_eq";
        }
        case 8: {
            auto x = vars(static_cast<int>(rng.uniform(2, 5)), 0, 4);
            s.add(distinct_bounds(x));
            return "distinct_bounds";
        }
        case 9: {
            auto x = vars(3, -3, 3);
            s.add(mul_eq(x[0], x[1], x[2]));
            return "mul_eq";
        }
        default: {
            auto x = vars(3, -2, 3);
            s.add(eq(IfThenElse<Var, Var, Var>(x[0], x[1], x[2]), rng.uniform(-2, 3) ? x[1] : x[2]));
            return "eq-ite";
        }
    }
}

inline std::uint64_t updates(const Store& s) { return s.stats().domain_updates; }

}  // namespace detail

/// Runs a propagator once and, when it reports Idempotent, again: the second
/// run must not change any domain.
inline bool audit_one(SuiteResult& r, Store& s, PropId p, const std::string& label, std::map<std::string, int>& counts) {
    Status st = s.propagator(p).execute();
    ++counts[std::string(to_string(st))];
    if (st != Status::Idempotent) return true;
    ++r.checks;
    std::uint64_t before = detail::updates(s);
    Status again = s.propagator(p).execute();
    if (detail::updates(s) != before || again == Status::Failed) {
        r.fail(label + ": reported idempotent but re-execution changed domains");
        return false;
    }
    return true;
}

inline SuiteResult idempotency_audit(const Options& opt) {
    return detail::timed("idempotency-audit", [&](SuiteResult& r) {
        SeededRng rng(opt.seed);
        std::map<std::string, int> counts;
        // D(y1) = D(y2) = {1,2}, y1 + y2 != 4: a pass that cannot guarantee a fixpoint.
        {
            Store s;
            Var y1(s, s.new_var(1, 2)), y2(s, s.new_var(1, 2));
            PropId p = s.add(neq(Add<Var, Var>(y1, y2), 4));
            Status st = s.propagator(p).execute();
            r.expect(st == Status::Suspend, std::string("witness y1+y2!=4 reported ") + to_string(st));
            r.records.push_back({{"witness", "y1+y2!=4 on {1,2}^2"}, {"status", to_string(st)}});
        }
        std::size_t cases = 0;
        while (cases < opt.random_cases) {
            Store s;
            std::string label = detail::random_case(rng, s);
            PropId p = static_cast<PropId>(s.num_propagators() - 1);
            ++cases;
            if (!audit_one(r, s, p, label, counts)) continue;
            // A couple of random narrowings, then another audit of the same propagator.
            for (int k = 0; k < 2 && !s.failed(); ++k) {
                VarId v{static_cast<int>(rng.uniform(0, static_cast<Int>(s.num_vars()) - 1))};
                Interval d = s.domain(v);
                s.push();
                bool ok = rng.uniform(0, 1) ? s.upd_min(v, rng.uniform(d.lo, d.hi)) : s.upd_max(v, rng.uniform(d.lo, d.hi));
                if (ok) audit_one(r, s, p, label + " after narrowing", counts);
                ++cases;
            }
        }
        json c;
        for (const auto& [k, v] : counts) c[k] = v;
        r.records.push_back({{"cases", cases}, {"statuses", c}});
    });
}

// ---------------------------------------------------------------------------
// Dispatch equivalence: static and dynamic builds of the same tree

namespace detail {

inline std::vector<KindCase> dispatch_kinds() {
    std::vector<KindCase> out;
    for (const auto& kc : conformance_kinds())
        if (kc.kind != NodeKind::LinearTerm || kc.value == 2) out.push_back(kc);
    out.push_back({NodeKind::Const, 0, 3});
    return out;
}

/// Builds a tree from a kind sequence: position i is a node whose first child
/// is position i+1; other children are fresh leaves.
inline ViewNode chain_tree(Store& s, const std::vector<KindCase>& chain, std::size_t i, SeededRng& rng,
                           bool full_kids) {
    auto leaf = [&]() {
        Int a = rng.uniform(-6, 6), b = rng.uniform(-6, 6);
        return vn::var(s, s.new_var(std::min(a, b), std::max(a, b)));
    };
    if (i == chain.size()) return leaf();
    const KindCase& kc = chain[i];
    if (kc.kind == NodeKind::Const) return vn::cst(kc.value);
    std::vector<ViewNode> kids;
    for (std::size_t k = 0; k < kc.children; ++k)
        kids.push_back(k == 0 || full_kids ? chain_tree(s, chain, i + 1, rng, false) : leaf());
    return vn::node(kc.kind, std::move(kids), kc.value);
}

inline std::vector<Interval> domains(const Store& s) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < s.num_vars(); ++i) out.push_back(s.domain(VarId{static_cast<int>(i)}));
    return out;
}

}  // namespace detail

/// Applies an identical update sequence through both realizations of one tree
/// in two stores with the same variables and compares every domain and bound.
inline void compare_dispatch(SuiteResult& r, const std::vector<KindCase>& chain, std::uint64_t seed, bool full_kids,
                             int steps = 8) {
    Store a, b;
    SeededRng ra(seed), rb(seed);
    ViewNode na = detail::chain_tree(a, chain, 0, ra, full_kids);
    ViewNode nb = detail::chain_tree(b, chain, 0, rb, full_kids);
    TreeView sv = build_static(na, a);
    DynBox dv = build_dynamic(nb, b);
    SeededRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::string expr = to_string(na);
    for (int k = 0; k < steps; ++k) {
        ++r.checks;
        if (sv.get_min() != dv.get_min() || sv.get_max() != dv.get_max() || detail::domains(a) != detail::domains(b)) {
            r.fail("dispatch mismatch on " + expr + " after " + std::to_string(k) + " updates");
            return;
        }
        if (a.failed() || b.failed()) {
            r.expect(a.failed() == b.failed(), "failure mismatch on " + expr);
            return;
        }
        Int lo = sv.get_min(), hi = sv.get_max();
        Int i = rng.uniform(lo - 1, hi + 1);
        bool ok_a, ok_b;
        switch (a.num_vars() ? rng.uniform(0, 2) : rng.uniform(0, 1)) {
            case 0:
                ok_a = sv.upd_min(i);
                ok_b = dv.upd_min(i);
                break;
            case 1:
                ok_a = sv.upd_max(i);
                ok_b = dv.upd_max(i);
                break;
            default: {
                VarId v{static_cast<int>(rng.uniform(0, static_cast<Int>(a.num_vars()) - 1))};
                Interval d = a.domain(v);
                Int j = rng.uniform(d.lo, d.hi);
                bool up = rng.uniform(0, 1);
                ok_a = up ? a.upd_min(v, j) : a.upd_max(v, j);
                ok_b = up ? b.upd_min(v, j) : b.upd_max(v, j);
            }
        }
        if (ok_a != ok_b) {
            r.fail("dispatch result mismatch on " + expr);
            return;
        }
    }
}

inline SuiteResult dispatch_equivalence(const Options& opt) {
    return detail::timed("dispatch-equivalence", [&](SuiteResult& r) {
        auto kinds = detail::dispatch_kinds();
        std::uint64_t seed = opt.seed;
        std::size_t shapes = 0;
        // Every kind sequence up to depth 3 (first-child chains), several domain draws each.
        for (const auto& k1 : kinds) {
            compare_dispatch(r, {k1}, ++seed, true);
            ++shapes;
            for (const auto& k2 : kinds) {
                for (int rep = 0; rep < 2; ++rep) compare_dispatch(r, {k1, k2}, ++seed, true);
                ++shapes;
                for (const auto& k3 : kinds) {
                    compare_dispatch(r, {k1, k2, k3}, ++seed, false);
                    ++shapes;
                }
            }
        }
        // Random deeper trees.
        SeededRng rng(opt.seed);
        for (std::size_t c = 0; c < opt.random_cases / 10; ++c) {
            std::vector<KindCase> chain;
            int depth = static_cast<int>(rng.uniform(4, 6));
            for (int d = 0; d < depth; ++d) chain.push_back(kinds[rng.uniform(0, static_cast<Int>(kinds.size()) - 2)]);
            compare_dispatch(r, chain, ++seed, false, 12);
        }
        r.records.push_back({{"exhaustive_shapes", shapes}, {"random_trees", opt.random_cases / 10}});
    });
}

// ---------------------------------------------------------------------------
// Variant search equivalence on tiny instances

struct VariantOutcome {
    ModelVariant variant;
    std::set<std::vector<Int>> solutions;
    std::optional<Int> objective;
    SearchStats stats;
    SearchStatus status = SearchStatus::Complete;
};

inline VariantOutcome run_variant(const InstanceSpec& sp, ModelVariant v, SearchLimits lim = {}) {
    Model m = build_model(sp, v);
    VariantOutcome out;
    out.variant = v;
    SearchResult res = solve(m, m.brancher(), lim, true, [&](const Store& s) {
        std::vector<Int> vals;
        for (VarId x : m.decision) vals.push_back(s.min(x));
        out.solutions.insert(std::move(vals));
        return true;
    });
    out.objective = res.objective;
    out.stats = res.stats;
    out.status = res.status;
    return out;
}

inline std::vector<InstanceSpec> tiny_instances() {
    return {LinearSpec{4, 4, 2, 3, 7},     NonlinearSpec{4, 4, 2, 2, 2, 3}, GolfersSpec{2, 2, 2},
            GolfersSpec{3, 2, 2},          GolombSpec{5, 11},               GolombSpec{5, 10},
            GolombSpec{4, 6},              LabsSpec{6},                     EccSpec{2, 2, 3, 2, Metric::Hamming},
            EccSpec{3, 2, 3, 2, Metric::Lee}};
}

inline SuiteResult variant_equivalence(const Options&, const std::vector<InstanceSpec>& instances = tiny_instances()) {
    return detail::timed("variant-equivalence", [&](SuiteResult& r) {
        for (const auto& sp : instances) {
            std::optional<VariantOutcome> ref;
            for (ModelVariant v : kAllVariants) {
                if (!supports(sp, v)) continue;
                VariantOutcome o = run_variant(sp, v);
                if (!ref) {
                    ref = o;
                } else {
                    r.expect(o.solutions == ref->solutions && o.objective == ref->objective,
                             instance_id(sp) + ": " + to_string(v) + " differs from " + to_string(ref->variant));
                }
                r.records.push_back({{"instance", instance_id(sp)},
                                     {"variant", to_string(v)},
                                     {"solutions", o.solutions.size()},
                                     {"objective", o.objective ? json(*o.objective) : json(nullptr)},
                                     {"fails", o.stats.fails}});
            }
        }
    });
}

// ---------------------------------------------------------------------------

inline std::vector<SuiteResult> run_all(const Options& opt) {
    return {approx_laws(opt),          taxonomy(opt),         view_conformance(opt),    box_view_example(opt),
            completeness_matrix(opt), idempotency_audit(opt), dispatch_equivalence(opt), variant_equivalence(opt)};
}

}  // namespace boxview::verify
