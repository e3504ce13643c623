#pragma once

// Benchmark model builders. Every family can be posted under each
// decomposition variant it supports; the compile-time specialized variants
// use fully typed view compositions where the shape is known.

#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "boxview/decompose.hpp"
#include "boxview/propagators.hpp"
#include "boxview/rng.hpp"
#include "boxview/search.hpp"
#include "boxview/view_node.hpp"

namespace boxview {

struct LinearSpec {
    int n = 0, d = 0, c = 0, a = 0;
    std::uint64_t seed = 1;
};
struct NonlinearSpec {
    int n = 0, d = 0, c = 0, a1 = 0, a2 = 0;
    std::uint64_t seed = 1;
};
struct GolfersSpec {
    int w = 0, g = 0, s = 0;
};
struct GolombSpec {
    int m = 0, length = 0;
};
struct LabsSpec {
    int n = 0;
};
enum class Metric { Hamming, Lee };
struct EccSpec {
    int a = 0, n = 0, l = 0, d = 0;
    Metric metric = Metric::Hamming;
};

using InstanceSpec = std::variant<LinearSpec, NonlinearSpec, GolfersSpec, GolombSpec, LabsSpec, EccSpec>;

inline const char* problem_name(const InstanceSpec& sp) {
    static const char* names[] = {"linear", "nonlinear", "golfers", "golomb", "labs", "ecc"};
    return names[sp.index()];
}

inline std::string instance_id(const InstanceSpec& sp) {
    std::ostringstream os;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearSpec>)
                os << "linear-" << x.n << '-' << x.d << '-' << x.c << '-' << x.a << "-s" << x.seed;
            else if constexpr (std::is_same_v<T, NonlinearSpec>)
                os << "nonlinear-" << x.n << '-' << x.d << '-' << x.c << '-' << x.a1 << '-' << x.a2 << "-s" << x.seed;
            else if constexpr (std::is_same_v<T, GolfersSpec>)
                os << "golfers-" << x.w << '-' << x.g << '-' << x.s;
            else if constexpr (std::is_same_v<T, GolombSpec>)
                os << "golomb-" << x.m << '-' << x.length;
            else if constexpr (std::is_same_v<T, LabsSpec>)
                os << "labs-" << x.n;
            else
                os << "ecc-" << (x.metric == Metric::Lee ? "lee" : "hamming") << '-' << x.a << '-' << x.n << '-'
                   << x.l << '-' << x.d;
        },
        sp);
    return os.str();
}

inline void validate(const InstanceSpec& sp) {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("boxview: invalid instance: ") + what);
    };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearSpec>) {
                need(x.n > 0 && x.d > 0 && x.c > 0 && x.a > 0, "parameters must be positive");
                need(x.a <= x.n, "a <= n");
            } else if constexpr (std::is_same_v<T, NonlinearSpec>) {
                need(x.n > 0 && x.d > 0 && x.c > 0 && x.a1 > 0 && x.a2 > 0, "parameters must be positive");
                need(x.a2 <= x.n, "a2 <= n");
            } else if constexpr (std::is_same_v<T, GolfersSpec>) {
                need(x.w > 0 && x.g > 0 && x.s > 0, "parameters must be positive");
            } else if constexpr (std::is_same_v<T, GolombSpec>) {
                need(x.m >= 2, "m >= 2");
                need(x.length >= x.m - 1, "length >= m-1");
            } else if constexpr (std::is_same_v<T, LabsSpec>) {
                need(x.n >= 2, "n >= 2");
            } else {
                need(x.n > 0 && x.l > 0 && x.d > 0, "parameters must be positive");
                need(x.a >= 2, "alphabet a >= 2");
            }
        },
        sp);
}

/// Global forms exist only where the family pairs with a global propagator.
inline bool supports(const InstanceSpec& sp, ModelVariant v) {
    if (std::holds_alternative<LabsSpec>(sp))
        return v != ModelVariant::ViewsStaticGlobal && v != ModelVariant::ViewsDynamicGlobal;
    return true;
}

struct BuildOptions {
    bool typed_static = true;            // typed compositions for the static variants
    std::optional<bool> share_subexpressions;  // default: on for ECC only
};

struct Model {
    std::string problem;
    std::string instance;
    ModelVariant variant = ModelVariant::Vars;
    std::unique_ptr<Store> store = std::make_unique<Store>();
    std::vector<VarId> decision;
    std::vector<Relation> side;       // symmetry breaking and structure, identical in every variant
    std::vector<Relation> relations;  // the constraints under study
    std::optional<ViewNode> objective;
    std::string note;
    PostCounts counts;
    std::function<SearchResult(const Brancher&, SearchLimits)> minimize;

    bool optimization() const { return static_cast<bool>(minimize); }

    Brancher brancher(VarSelect vs = VarSelect::InputOrder, ValueSelect val = ValueSelect::MinValue) const {
        return Brancher{decision, vs, val};
    }

    /// Checks a full assignment (indexed by variable) against every relation.
    bool check(const std::vector<Int>& values) const {
        auto value_of = [&](VarId v) { return values.at(v.index); };
        for (const auto& r : side)
            if (!satisfied(r, value_of)) return false;
        for (const auto& r : relations)
            if (!satisfied(r, value_of)) return false;
        return true;
    }

    std::string dump() const {
        std::ostringstream os;
        if (!note.empty()) os << "# " << note << '\n';
        for (std::size_t i = 0; i < store->num_vars(); ++i) {
            VarId v{static_cast<int>(i)};
            os << "var " << store->name(v) << ' ' << store->min(v) << ' ' << store->max(v) << '\n';
        }
        for (const auto& r : side) os << to_string(r) << '\n';
        for (const auto& r : relations) os << to_string(r) << '\n';
        if (objective) os << "(minimize " << to_string(*objective) << ")\n";
        return os.str();
    }

    std::vector<std::string> dump_views() const {
        std::vector<std::string> out;
        for (const auto& r : relations)
            for (const auto& a : r.args) out.push_back(to_string(a));
        if (objective) out.push_back(to_string(*objective));
        return out;
    }
};

namespace typed {

template <class Elem, int N>
struct FoldAdd {
    using type = Add<typename FoldAdd<Elem, N - 1>::type, Elem>;
};
template <class Elem>
struct FoldAdd<Elem, 1> {
    using type = Elem;
};

template <int N>
struct FoldMul {
    using type = Mul<typename FoldMul<N - 1>::type, Var>;
};
template <>
struct FoldMul<1> {
    using type = Var;
};

/// Left-leaning sum of mk(0) .. mk(N-1).
template <class Elem, int N, class Make>
typename FoldAdd<Elem, N>::type fold_add(const Make& mk) {
    if constexpr (N == 1)
        return mk(0);
    else
        return typename FoldAdd<Elem, N>::type(fold_add<Elem, N - 1>(mk), mk(N - 1));
}

template <int N>
typename FoldMul<N>::type fold_mul(Store& s, const VarId* ids) {
    if constexpr (N == 1)
        return Var(s, ids[0]);
    else
        return typename FoldMul<N>::type(fold_mul<N - 1>(s, ids), Var(s, ids[N - 1]));
}

/// Calls f(std::integral_constant<int, n>) for n in [Lo..Hi]; false if out of range.
template <int Lo, int Hi, class F>
bool dispatch(int n, F&& f) {
    if constexpr (Lo > Hi) {
        return false;
    } else {
        if (n == Lo) {
            f(std::integral_constant<int, Lo>{});
            return true;
        }
        return dispatch<Lo + 1, Hi>(n, std::forward<F>(f));
    }
}

using LeeTerm = Min2<Abs<Sub<Var, Var>>, Sub<Const, Abs<Sub<Var, Var>>>>;

inline LeeTerm lee_term(Store& s, VarId x, VarId y, Int a) {
    return LeeTerm(Abs<Sub<Var, Var>>(Sub<Var, Var>(Var(s, x), Var(s, y))),
                   Sub<Const, Abs<Sub<Var, Var>>>(Const(s, a),
                                                  Abs<Sub<Var, Var>>(Sub<Var, Var>(Var(s, x), Var(s, y)))));
}

using LabsObjective = SumN<Sqr<SumN<Mul<Var, Var>>>>;

}  // namespace typed

namespace detail {

inline ViewNode chain(const std::vector<ViewNode>& terms, NodeKind k) {
    ViewNode acc = terms.at(0);
    for (std::size_t i = 1; i < terms.size(); ++i) acc = vn::node(k, {std::move(acc), terms[i]});
    return acc;
}

inline bool typed_static(ModelVariant v, const BuildOptions& o) {
    return o.typed_static && (v == ModelVariant::ViewsStatic || v == ModelVariant::ViewsStaticGlobal);
}

inline void post_side(Model& m) {
    Decomposer side(*m.store, ModelVariant::ViewsStatic);
    for (const auto& r : m.side) side.post(r);
}

inline std::vector<VarId> new_vars(Store& s, int n, Int lo, Int hi, const std::string& prefix) {
    std::vector<VarId> out;
    for (int i = 0; i < n; ++i) out.push_back(s.new_var(lo, hi, prefix + std::to_string(i)));
    return out;
}

}  // namespace detail

inline Model build_linear(const LinearSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    Model m;
    Store& s = *m.store;
    m.decision = detail::new_vars(s, sp.n, 1, sp.d, "x");
    SeededRng rng(sp.seed);
    Decomposer dec(s, v);
    for (int e = 0; e < sp.c; ++e) {
        std::vector<int> idx = rng.subset(sp.n, sp.a);
        Int t = rng.uniform(sp.a, static_cast<Int>(sp.a) * sp.d);
        std::vector<ViewNode> terms;
        std::vector<VarId> ids;
        for (int i : idx) {
            terms.push_back(vn::var(s, m.decision[i]));
            ids.push_back(m.decision[i]);
        }
        Relation r = uses_globals(v) ? rel::sum_in(terms, t, t)
                                     : rel::eq(detail::chain(terms, NodeKind::Add), vn::cst(t));
        m.relations.push_back(r);
        bool done = false;
        if (detail::typed_static(v, o)) {
            if (v == ModelVariant::ViewsStaticGlobal) {
                std::vector<Var> xs;
                for (VarId id : ids) xs.emplace_back(s, id);
                dec.add(sum_eq(std::move(xs), Range(s, t, t)));
                done = true;
            } else {
                done = typed::dispatch<1, 8>(sp.a, [&](auto n) {
                    constexpr int N = decltype(n)::value;
                    auto view = typed::fold_add<Var, N>([&](int i) { return Var(s, ids[i]); });
                    dec.add(eq(view, Const(s, t)));
                });
            }
        }
        if (!done) dec.post(r);
    }
    m.counts = dec.counts();
    return m;
}

inline Model build_nonlinear(const NonlinearSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    Model m;
    Store& s = *m.store;
    m.decision = detail::new_vars(s, sp.n, 1, sp.d, "x");
    SeededRng rng(sp.seed);
    PostOptions po;
    po.project_terms = uses_views(v) && uses_globals(v);
    Decomposer dec(s, v, po);
    Int dpow = 1;
    for (int i = 0; i < sp.a2; ++i) dpow = mul_checked(dpow, sp.d);
    for (int e = 0; e < sp.c; ++e) {
        std::vector<std::vector<VarId>> prods;
        std::vector<ViewNode> terms;
        for (int j = 0; j < sp.a1; ++j) {
            std::vector<int> idx = rng.subset(sp.n, sp.a2);
            std::vector<VarId> ids;
            std::vector<ViewNode> factors;
            for (int i : idx) {
                ids.push_back(m.decision[i]);
                factors.push_back(vn::var(s, m.decision[i]));
            }
            prods.push_back(ids);
            terms.push_back(detail::chain(factors, NodeKind::Mul));
        }
        Int t = rng.uniform(sp.a1, mul_checked(sp.a1, dpow));
        Relation r = uses_globals(v) ? rel::sum_in(terms, t, t)
                                     : rel::eq(detail::chain(terms, NodeKind::Add), vn::cst(t));
        m.relations.push_back(r);
        bool done = false;
        if (detail::typed_static(v, o)) {
            done = typed::dispatch<1, 4>(sp.a2, [&](auto a2) {
                constexpr int A2 = decltype(a2)::value;
                using P = typename typed::FoldMul<A2>::type;
                auto prod = [&](int j) { return typed::fold_mul<A2>(s, prods[j].data()); };
                if (v == ModelVariant::ViewsStaticGlobal) {
                    std::vector<Var> xs;
                    for (int j = 0; j < sp.a1; ++j) {
                        if constexpr (A2 == 1)
                            xs.emplace_back(s, prods[j][0]);
                        else
                            xs.emplace_back(s, dec.project(prod(j)));
                    }
                    dec.add(sum_eq(std::move(xs), Range(s, t, t)));
                    done = true;
                    return;
                }
                done = typed::dispatch<1, 6>(sp.a1, [&](auto a1) {
                    constexpr int A1 = decltype(a1)::value;
                    dec.add(eq(typed::fold_add<P, A1>(prod), Const(s, t)));
                });
            }) && done;
        }
        if (!done) dec.post(r);
    }
    m.counts = dec.counts();
    return m;
}

inline Model build_golfers(const GolfersSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    Model m;
    Store& s = *m.store;
    const int players = sp.g * sp.s;
    // x[w][g][k]
    std::vector<std::vector<std::vector<VarId>>> x(sp.w, std::vector<std::vector<VarId>>(sp.g));
    for (int w = 0; w < sp.w; ++w)
        for (int g = 0; g < sp.g; ++g)
            for (int k = 0; k < sp.s; ++k) {
                std::string name = "x" + std::to_string(w) + "_" + std::to_string(g) + "_" + std::to_string(k);
                Int first = g * sp.s + k + 1;
                VarId id = w == 0 ? s.new_var(first, first, name) : s.new_var(1, players, name);
                x[w][g].push_back(id);
                if (w > 0) m.decision.push_back(id);
            }
    auto V = [&](VarId id) { return vn::var(s, id); };
    for (int w = 0; w < sp.w; ++w) {
        std::vector<ViewNode> week;
        for (int g = 0; g < sp.g; ++g)
            for (int k = 0; k < sp.s; ++k) week.push_back(V(x[w][g][k]));
        if (week.size() > 1) m.side.push_back(rel::distinct(week));
        for (int g = 0; g < sp.g; ++g) {
            for (int k = 0; k + 1 < sp.s; ++k)
                m.side.push_back(rel::leq(vn::add(V(x[w][g][k]), vn::cst(1)), V(x[w][g][k + 1])));
            if (g + 1 < sp.g) m.side.push_back(rel::leq(vn::add(V(x[w][g][0]), vn::cst(1)), V(x[w][g + 1][0])));
        }
    }
    detail::post_side(m);

    Decomposer dec(s, v);
    for (int w1 = 0; w1 < sp.w; ++w1)
        for (int w2 = w1 + 1; w2 < sp.w; ++w2)
            for (int g1 = 0; g1 < sp.g; ++g1)
                for (int g2 = 0; g2 < sp.g; ++g2) {
                    std::vector<ViewNode> terms;
                    std::vector<ReifEq<Var, Var>> views;
                    for (VarId a : x[w1][g1])
                        for (VarId b : x[w2][g2]) {
                            terms.push_back(vn::reif_eq(V(a), V(b)));
                            views.emplace_back(Var(s, a), Var(s, b));
                        }
                    Relation r = rel::sum_in(terms, 0, 1);
                    m.relations.push_back(r);
                    if (detail::typed_static(v, o)) {
                        if (v == ModelVariant::ViewsStaticGlobal)
                            dec.add(sum_eq(std::move(views), Range(s, 0, 1)));
                        else
                            dec.add(eq(SumN<ReifEq<Var, Var>>(std::move(views)), Range(s, 0, 1)));
                    } else {
                        dec.post(r);
                    }
                }
    m.counts = dec.counts();
    return m;
}

inline Model build_golomb(const GolombSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    Model m;
    Store& s = *m.store;
    std::vector<VarId> x;
    x.push_back(s.new_var(0, 0, "x0"));
    for (int i = 1; i < sp.m; ++i) {
        x.push_back(s.new_var(0, sp.length, "x" + std::to_string(i)));
        m.decision.push_back(x.back());
    }
    auto V = [&](int i) { return vn::var(s, x[i]); };
    for (int i = 0; i + 1 < sp.m; ++i) m.side.push_back(rel::leq(vn::add(V(i), vn::cst(1)), V(i + 1)));
    if (sp.m >= 3)
        m.side.push_back(rel::leq(vn::add(vn::sub(V(1), V(0)), vn::cst(1)), vn::sub(V(sp.m - 1), V(sp.m - 2))));
    detail::post_side(m);

    std::vector<ViewNode> diffs;
    std::vector<Sub<Var, Var>> views;
    for (int i = 0; i < sp.m; ++i)
        for (int j = 0; j < i; ++j) {
            diffs.push_back(vn::sub(V(i), V(j)));
            views.emplace_back(Var(s, x[i]), Var(s, x[j]));
        }
    Relation r = rel::distinct(diffs);
    m.relations.push_back(r);
    Decomposer dec(s, v);
    if (detail::typed_static(v, o))
        dec.add(distinct_bounds(std::move(views)));
    else
        dec.post(r);
    m.counts = dec.counts();
    return m;
}

inline Model build_labs(const LabsSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    if (!supports(InstanceSpec{sp}, v)) throw std::invalid_argument("boxview: labs has no global variant");
    Model m;
    Store& s = *m.store;
    m.decision = detail::new_vars(s, sp.n, -1, 1, "x");
    for (VarId id : m.decision) m.side.push_back(rel::neq(vn::var(s, id), 0));
    detail::post_side(m);

    // correlation i pairs x_j with x_{j+i+1} (1-based), j = 1..n-i-1
    std::vector<ViewNode> squares;
    std::vector<std::vector<std::pair<VarId, VarId>>> pairs;
    for (int i = 1; i <= sp.n - 1; ++i) {
        std::vector<ViewNode> prods;
        std::vector<std::pair<VarId, VarId>> ps;
        for (int j = 1; j <= sp.n - i - 1; ++j) {
            VarId a = m.decision[j - 1], b = m.decision[j + i];
            prods.push_back(vn::mul(vn::var(s, a), vn::var(s, b)));
            ps.emplace_back(a, b);
        }
        if (prods.empty()) continue;
        squares.push_back(vn::sqr(vn::sum(prods)));
        pairs.push_back(ps);
    }
    if (squares.empty()) squares.push_back(vn::cst(0));
    m.objective = vn::sum(squares);

    Decomposer dec(s, v);
    auto install = [&m, &s](auto view) {
        m.minimize = [&s, view](const Brancher& b, SearchLimits lim) { return branch_and_bound_min(s, view, b, lim); };
    };
    if (!uses_views(v)) {
        install(Var(s, dec.flatten(*m.objective)));
    } else if (is_dynamic(v)) {
        install(build_dynamic(*m.objective, s));
    } else if (o.typed_static && !pairs.empty()) {
        std::vector<Sqr<SumN<Mul<Var, Var>>>> sq;
        for (const auto& ps : pairs) {
            std::vector<Mul<Var, Var>> prods;
            for (auto [a, b] : ps) prods.emplace_back(Var(s, a), Var(s, b));
            sq.emplace_back(SumN<Mul<Var, Var>>(std::move(prods)));
        }
        install(typed::LabsObjective(std::move(sq)));
    } else {
        install(build_static(*m.objective, s));
    }
    m.counts = dec.counts();
    return m;
}

inline Model build_ecc(const EccSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    Model m;
    Store& s = *m.store;
    m.note = "symbols are encoded as 0.." + std::to_string(sp.a - 1);
    std::vector<std::vector<VarId>> x(sp.n);
    for (int i = 0; i < sp.n; ++i)
        for (int p = 0; p < sp.l; ++p) {
            x[i].push_back(s.new_var(0, sp.a - 1, "x" + std::to_string(i) + "_" + std::to_string(p)));
            m.decision.push_back(x[i].back());
        }
    PostOptions po;
    po.share_subexpressions = o.share_subexpressions.value_or(true);
    Decomposer dec(s, v, po);
    const bool lee = sp.metric == Metric::Lee;
    const Int hi = lee ? static_cast<Int>(sp.l) * sp.a : sp.l;
    for (int i = 0; i < sp.n; ++i)
        for (int j = i + 1; j < sp.n; ++j) {
            std::vector<ViewNode> terms;
            for (int p = 0; p < sp.l; ++p) {
                ViewNode a = vn::var(s, x[i][p]), b = vn::var(s, x[j][p]);
                if (lee) {
                    ViewNode dist = vn::abs(vn::sub(a, b));
                    terms.push_back(vn::min(dist, vn::sub(vn::cst(sp.a), dist)));
                } else {
                    terms.push_back(vn::reif_neq(a, b));
                }
            }
            Relation r = rel::sum_in(terms, sp.d, hi);
            m.relations.push_back(r);
            if (!detail::typed_static(v, o)) {
                dec.post(r);
                continue;
            }
            auto post_typed = [&](auto views) {
                using T = typename decltype(views)::value_type;
                if (v == ModelVariant::ViewsStaticGlobal)
                    dec.add(sum_eq(std::move(views), Range(s, sp.d, hi)));
                else
                    dec.add(eq(SumN<T>(std::move(views)), Range(s, sp.d, hi)));
            };
            if (lee) {
                std::vector<typed::LeeTerm> views;
                for (int p = 0; p < sp.l; ++p) views.push_back(typed::lee_term(s, x[i][p], x[j][p], sp.a));
                post_typed(std::move(views));
            } else {
                std::vector<ReifNeq<Var, Var>> views;
                for (int p = 0; p < sp.l; ++p) views.emplace_back(Var(s, x[i][p]), Var(s, x[j][p]));
                post_typed(std::move(views));
            }
        }
    m.counts = dec.counts();
    return m;
}

inline Model build_model(const InstanceSpec& sp, ModelVariant v, const BuildOptions& o = {}) {
    validate(sp);
    if (!supports(sp, v))
        throw std::invalid_argument(std::string("boxview: variant ") + to_string(v) + " not available for " +
                                    problem_name(sp));
    Model m = std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, LinearSpec>) return build_linear(x, v, o);
            else if constexpr (std::is_same_v<T, NonlinearSpec>) return build_nonlinear(x, v, o);
            else if constexpr (std::is_same_v<T, GolfersSpec>) return build_golfers(x, v, o);
            else if constexpr (std::is_same_v<T, GolombSpec>) return build_golomb(x, v, o);
            else if constexpr (std::is_same_v<T, LabsSpec>) return build_labs(x, v, o);
            else return build_ecc(x, v, o);
        },
        sp);
    m.problem = problem_name(sp);
    m.instance = instance_id(sp);
    m.variant = v;
    return m;
}

/// Searches the model: branch-and-bound for optimization problems, first
/// solution (or all with count_all) otherwise.
inline SearchResult solve(Model& m, const Brancher& b, SearchLimits lim = {}, bool count_all = false,
                          const SolutionCallback& on_solution = {}) {
    if (m.optimization()) return m.minimize(b, lim);
    if (!count_all && lim.max_solutions == 0) lim.max_solutions = 1;
    return dfs(*m.store, b, on_solution, lim);
}

}  // namespace boxview
