#pragma once

// Relations over expression trees and their posting under each
// decomposition variant: auxiliary variables or views, with or without
// global propagators.

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "boxview/propagators.hpp"
#include "boxview/view_node.hpp"

namespace boxview {

enum class RelKind { Eq, Leq, Neq, SumIn, Distinct, LinearEq };

struct Relation {
    RelKind kind = RelKind::Eq;
    std::vector<ViewNode> args;
    Int k = 0;   // Neq: excluded value; LinearEq: right-hand side
    Int lo = 0;  // SumIn
    Int hi = 0;
    std::vector<Int> coeffs;  // LinearEq

    friend bool operator==(const Relation&, const Relation&) = default;
};

namespace rel {
inline Relation make(RelKind kind, std::vector<ViewNode> args, Int k = 0, Int lo = 0, Int hi = 0,
                     std::vector<Int> coeffs = {}) {
    Relation r;
    r.kind = kind;
    r.args = std::move(args);
    r.k = k;
    r.lo = lo;
    r.hi = hi;
    r.coeffs = std::move(coeffs);
    return r;
}
inline Relation eq(ViewNode a, ViewNode b) { return make(RelKind::Eq, {std::move(a), std::move(b)}); }
inline Relation leq(ViewNode a, ViewNode b) { return make(RelKind::Leq, {std::move(a), std::move(b)}); }
inline Relation neq(ViewNode a, Int k) { return make(RelKind::Neq, {std::move(a)}, k); }
inline Relation sum_in(std::vector<ViewNode> terms, Int lo, Int hi) {
    if (terms.empty()) throw std::invalid_argument("boxview: sum-in needs at least one term");
    return make(RelKind::SumIn, std::move(terms), 0, lo, hi);
}
inline Relation distinct(std::vector<ViewNode> xs) { return make(RelKind::Distinct, std::move(xs)); }
inline Relation linear_eq(std::vector<Int> coeffs, std::vector<ViewNode> xs, Int rhs) {
    if (coeffs.size() != xs.size()) throw std::invalid_argument("boxview: linear-eq coefficient count");
    return make(RelKind::LinearEq, std::move(xs), rhs, 0, 0, std::move(coeffs));
}
}  // namespace rel

inline std::string to_string(const Relation& r) {
    std::ostringstream os;
    switch (r.kind) {
        case RelKind::Eq: os << "(eq"; break;
        case RelKind::Leq: os << "(leq"; break;
        case RelKind::Neq: os << "(neq"; break;
        case RelKind::SumIn: os << "(sum-in " << r.lo << ' ' << r.hi; break;
        case RelKind::Distinct: os << "(distinct"; break;
        case RelKind::LinearEq: os << "(linear-eq " << r.k; break;
    }
    for (std::size_t i = 0; i < r.args.size(); ++i) {
        os << ' ';
        if (r.kind == RelKind::LinearEq) os << r.coeffs[i] << ' ';
        write_prefix(os, r.args[i]);
    }
    if (r.kind == RelKind::Neq) os << ' ' << r.k;
    os << ')';
    return os.str();
}

inline Relation parse_relation(const std::string& text, const NameResolver& resolve) {
    SexpReader in(text);
    in.expect("(");
    std::string head = in.next();
    Relation r;
    if (head == "eq" || head == "leq") {
        r.kind = head == "eq" ? RelKind::Eq : RelKind::Leq;
        r.args.push_back(parse_view(in, resolve));
        r.args.push_back(parse_view(in, resolve));
    } else if (head == "neq") {
        r.kind = RelKind::Neq;
        r.args.push_back(parse_view(in, resolve));
        r.k = in.integer();
    } else if (head == "sum-in" || head == "distinct" || head == "linear-eq") {
        if (head == "sum-in") {
            r.kind = RelKind::SumIn;
            r.lo = in.integer();
            r.hi = in.integer();
        } else if (head == "linear-eq") {
            r.kind = RelKind::LinearEq;
            r.k = in.integer();
        } else {
            r.kind = RelKind::Distinct;
        }
        while (in.peek() != ")") {
            if (r.kind == RelKind::LinearEq) r.coeffs.push_back(in.integer());
            r.args.push_back(parse_view(in, resolve));
        }
        if (r.args.empty()) throw ParseError("boxview: relation without arguments");
    } else {
        throw ParseError("boxview: unknown relation '" + head + "'");
    }
    in.expect(")");
    if (!in.at_end()) throw ParseError("boxview: trailing input after relation");
    return r;
}

/// Whether a ground assignment satisfies the relation.
inline bool satisfied(const Relation& r, const std::function<Int(VarId)>& value_of) {
    std::vector<Int> v;
    for (const auto& a : r.args) v.push_back(evaluate(a, value_of));
    switch (r.kind) {
        case RelKind::Eq: return v[0] == v[1];
        case RelKind::Leq: return v[0] <= v[1];
        case RelKind::Neq: return v[0] != r.k;
        case RelKind::SumIn: {
            Int s = 0;
            for (Int x : v) s = add_checked(s, x);
            return r.lo <= s && s <= r.hi;
        }
        case RelKind::Distinct: {
            std::sort(v.begin(), v.end());
            return std::adjacent_find(v.begin(), v.end()) == v.end();
        }
        case RelKind::LinearEq: {
            Int s = 0;
            for (std::size_t i = 0; i < v.size(); ++i) s = add_checked(s, mul_checked(r.coeffs[i], v[i]));
            return s == r.k;
        }
    }
    return false;
}

enum class ModelVariant { Vars, VarsGlobal, ViewsStatic, ViewsDynamic, ViewsStaticGlobal, ViewsDynamicGlobal };

inline constexpr ModelVariant kAllVariants[] = {ModelVariant::Vars,         ModelVariant::VarsGlobal,
                                                ModelVariant::ViewsStatic,  ModelVariant::ViewsDynamic,
                                                ModelVariant::ViewsStaticGlobal, ModelVariant::ViewsDynamicGlobal};

inline const char* to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::Vars: return "vars";
        case ModelVariant::VarsGlobal: return "vars-global";
        case ModelVariant::ViewsStatic: return "views-static";
        case ModelVariant::ViewsDynamic: return "views-dynamic";
        case ModelVariant::ViewsStaticGlobal: return "views-static-global";
        case ModelVariant::ViewsDynamicGlobal: return "views-dynamic-global";
    }
    return "?";
}

inline std::optional<ModelVariant> parse_variant(const std::string& s) {
    for (ModelVariant v : kAllVariants)
        if (s == to_string(v)) return v;
    return std::nullopt;
}

inline bool uses_views(ModelVariant v) { return v != ModelVariant::Vars && v != ModelVariant::VarsGlobal; }
inline bool uses_globals(ModelVariant v) {
    return v == ModelVariant::VarsGlobal || v == ModelVariant::ViewsStaticGlobal ||
           v == ModelVariant::ViewsDynamicGlobal;
}
inline bool is_dynamic(ModelVariant v) {
    return v == ModelVariant::ViewsDynamic || v == ModelVariant::ViewsDynamicGlobal;
}

struct PostOptions {
    bool share_subexpressions = false;  // Vars: one auxiliary per distinct subexpression
    bool project_terms = false;         // Views+Global: sum terms projected to auxiliaries
};

struct PostCounts {
    std::size_t aux_vars = 0;
    std::size_t propagators = 0;
};

/// Posts relations of one model under one variant. Keeps the constant and
/// shared-subexpression caches of the auxiliary-variable decomposition.
class Decomposer {
public:
    Decomposer(Store& s, ModelVariant v, PostOptions opt = {}) : s_(s), v_(v), opt_(opt) {}

    const PostCounts& counts() const { return counts_; }
    ModelVariant variant() const { return v_; }

    /// Adds the propagators of r (without running the queue).
    void post(const Relation& r) {
        for (const auto& a : r.args) check_vars(a, s_);
        if (uses_views(v_)) {
            if (is_dynamic(v_))
                post_views(r, [this](const ViewNode& n) { return build_dynamic(n, s_); });
            else
                post_views(r, [this](const ViewNode& n) { return build_static(n, s_); });
        } else {
            post_vars(r);
        }
    }

    /// Flattens an expression into a variable (Vars decomposition).
    VarId flatten(const ViewNode& n) {
        if (n.kind == NodeKind::Var) return n.var;
        if (n.kind == NodeKind::Const) return constant(n.value);
        std::string key;
        if (opt_.share_subexpressions) {
            key = to_string(n);
            auto it = shared_.find(key);
            if (it != shared_.end()) return it->second;
        }
        std::vector<VarId> kids;
        for (const auto& k : n.kids) kids.push_back(flatten(k));
        Interval h = hull_of(n.kind, n.value, kids);
        VarId aux = s_.new_var(h.lo, h.hi, "_a" + std::to_string(counts_.aux_vars));
        ++counts_.aux_vars;
        post_node(n.kind, n.value, kids, Var(s_, aux));
        if (opt_.share_subexpressions) shared_.emplace(key, aux);
        return aux;
    }

    /// Projects a view onto a fresh variable through a view-based equality.
    template <BoxView V>
    VarId project(const V& view) {
        VarId aux = s_.new_var(view.get_min(), view.get_max(), "_p" + std::to_string(counts_.aux_vars));
        ++counts_.aux_vars;
        add(eq(view, Var(s_, aux)));
        return aux;
    }

    void add(std::unique_ptr<Propagator> p) {
        s_.add(std::move(p));
        ++counts_.propagators;
    }

private:
    VarId constant(Int k) {
        auto it = consts_.find(k);
        if (it != consts_.end()) return it->second;
        VarId v = s_.new_var(k, k, "_c" + std::to_string(k));
        consts_.emplace(k, v);
        return v;
    }

    std::vector<Var> vars_of(const std::vector<VarId>& ids) {
        std::vector<Var> out;
        for (VarId v : ids) out.emplace_back(s_, v);
        return out;
    }

    template <class F>
    auto with_op(NodeKind kind, Int value, const std::vector<VarId>& k, F&& f) {
        auto V = [&](std::size_t i) { return Var(s_, k[i]); };
        switch (kind) {
            case NodeKind::Add: return f(Add<Var, Var>(V(0), V(1)));
            case NodeKind::Sub: return f(Sub<Var, Var>(V(0), V(1)));
            case NodeKind::Neg: return f(Neg<Var>(V(0)));
            case NodeKind::Mul: return f(Mul<Var, Var>(V(0), V(1)));
            case NodeKind::Abs: return f(Abs<Var>(V(0)));
            case NodeKind::Sqr: return f(Sqr<Var>(V(0)));
            case NodeKind::Min2: return f(Min2<Var, Var>(V(0), V(1)));
            case NodeKind::Max2: return f(Max2<Var, Var>(V(0), V(1)));
            case NodeKind::LinearTerm: return f(Lin<Var>(value, V(0)));
            case NodeKind::Sum: return f(SumN<Var>(vars_of(k)));
            case NodeKind::ReifEq: return f(ReifEq<Var, Var>(V(0), V(1)));
            case NodeKind::ReifNeq: return f(ReifNeq<Var, Var>(V(0), V(1)));
            case NodeKind::ReifLeq: return f(ReifLeq<Var, Var>(V(0), V(1)));
            case NodeKind::IfThenElse: return f(IfThenElse<Var, Var, Var>(V(0), V(1), V(2)));
            case NodeKind::Var:
            case NodeKind::Const: break;
        }
        throw std::logic_error("boxview: leaf has no operator");
    }

    Interval hull_of(NodeKind kind, Int value, const std::vector<VarId>& kids) {
        return with_op(kind, value, kids, [](const auto& view) { return bounds(view); });
    }

    /// Primitive propagator for one node: op(kids) = rhs.
    template <BoxView R>
    void post_node(NodeKind kind, Int value, const std::vector<VarId>& kids, R rhs) {
        if (kind == NodeKind::Sum) {
            add(sum_eq(vars_of(kids), std::move(rhs)));
            return;
        }
        with_op(kind, value, kids, [&](auto view) {
            add(eq(std::move(view), rhs));
            return 0;
        });
    }

    bool is_leaf(const ViewNode& n) const { return n.kind == NodeKind::Var || n.kind == NodeKind::Const; }

    template <BoxView R>
    void post_absorbed(const ViewNode& n, R rhs) {
        std::vector<VarId> kids;
        for (const auto& k : n.kids) kids.push_back(flatten(k));
        post_node(n.kind, n.value, kids, std::move(rhs));
    }

    std::vector<Var> flatten_all(const std::vector<ViewNode>& ns) {
        std::vector<Var> out;
        for (const auto& n : ns) out.emplace_back(s_, flatten(n));
        return out;
    }

    void post_vars(const Relation& r) {
        switch (r.kind) {
            case RelKind::Eq: {
                const ViewNode* a = &r.args[0];
                const ViewNode* b = &r.args[1];
                if (is_leaf(*a) && !is_leaf(*b)) std::swap(a, b);
                if (!is_leaf(*a) && b->kind == NodeKind::Const) {
                    post_absorbed(*a, Const(s_, b->value));
                } else if (!is_leaf(*a) && b->kind == NodeKind::Var) {
                    post_absorbed(*a, Var(s_, b->var));
                } else {
                    add(eq(Var(s_, flatten(*a)), Var(s_, flatten(*b))));
                }
                return;
            }
            case RelKind::Leq: add(leq(Var(s_, flatten(r.args[0])), Var(s_, flatten(r.args[1])))); return;
            case RelKind::Neq: add(neq(Var(s_, flatten(r.args[0])), r.k)); return;
            case RelKind::SumIn: {
                auto terms = flatten_all(r.args);
                if (v_ == ModelVariant::VarsGlobal || terms.size() == 1) {
                    add(sum_eq(std::move(terms), Range(s_, r.lo, r.hi)));
                    return;
                }
                // left-leaning chain of binary sums; the last one is absorbed
                VarId acc = terms[0].id();
                for (std::size_t i = 1; i + 1 < terms.size(); ++i)
                    acc = flatten_pair(NodeKind::Add, acc, terms[i].id());
                add(eq(Add<Var, Var>(Var(s_, acc), terms.back()), Range(s_, r.lo, r.hi)));
                return;
            }
            case RelKind::Distinct: add(distinct_bounds(flatten_all(r.args))); return;
            case RelKind::LinearEq: add(linear_eq(r.coeffs, flatten_all(r.args), r.k)); return;
        }
    }

    VarId flatten_pair(NodeKind kind, VarId a, VarId b) {
        std::vector<VarId> kids{a, b};
        Interval h = hull_of(kind, 0, kids);
        VarId aux = s_.new_var(h.lo, h.hi, "_a" + std::to_string(counts_.aux_vars));
        ++counts_.aux_vars;
        post_node(kind, 0, kids, Var(s_, aux));
        return aux;
    }

    template <class Build>
    void post_views(const Relation& r, Build&& build) {
        using V = decltype(build(r.args[0]));
        auto all = [&] {
            std::vector<V> out;
            for (const auto& a : r.args) out.push_back(build(a));
            return out;
        };
        switch (r.kind) {
            case RelKind::Eq:
                // a*X = Y: the scaling stays in the constraint so its
                // propagator can run to a fixpoint on the bounds of X.
                for (int side = 0; side < 2; ++side) {
                    const ViewNode& l = r.args[side];
                    if (l.kind == NodeKind::LinearTerm) {
                        std::vector<V> xs{build(l.kids[0]), build(r.args[1 - side])};
                        add(linear_eq({l.value, -1}, std::move(xs), 0));
                        return;
                    }
                }
                add(eq(build(r.args[0]), build(r.args[1])));
                return;
            case RelKind::Leq: add(leq(build(r.args[0]), build(r.args[1]))); return;
            case RelKind::Neq: add(neq(build(r.args[0]), r.k)); return;
            case RelKind::SumIn: {
                if (!uses_globals(v_)) {
                    add(eq(build(vn::sum(r.args)), Range(s_, r.lo, r.hi)));
                } else if (opt_.project_terms) {
                    std::vector<Var> terms;
                    for (const auto& a : r.args)
                        terms.emplace_back(s_, is_leaf(a) ? flatten(a) : project(build(a)));
                    add(sum_eq(std::move(terms), Range(s_, r.lo, r.hi)));
                } else {
                    add(sum_eq(all(), Range(s_, r.lo, r.hi)));
                }
                return;
            }
            case RelKind::Distinct: add(distinct_bounds(all())); return;
            case RelKind::LinearEq: add(linear_eq(r.coeffs, all(), r.k)); return;
        }
    }

    Store& s_;
    ModelVariant v_;
    PostOptions opt_;
    PostCounts counts_;
    std::map<Int, VarId> consts_;
    std::map<std::string, VarId> shared_;
};

}  // namespace boxview
