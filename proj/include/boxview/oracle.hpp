#pragma once

// Brute-force reference semantics over explicit tuple sets: views as image
// and preimage functions, exact and approximation-bounded propagation, and an
// exhaustive propagator checker.

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boxview/approx.hpp"
#include "boxview/rng.hpp"
#include "boxview/store.hpp"

namespace boxview::oracle {

/// f : Z^in -> Z^out.
struct FuncSpec {
    std::size_t in_arity = 0;
    std::size_t out_arity = 0;
    std::function<Tuple(const Tuple&)> eval;

    Tuple operator()(const Tuple& t) const {
        if (t.size() != in_arity) throw std::invalid_argument("boxview: function arity mismatch");
        Tuple r = eval(t);
        if (r.size() != out_arity) throw std::logic_error("boxview: function returned wrong arity");
        return r;
    }
};

inline FuncSpec func(std::size_t in, std::size_t out, std::function<Tuple(const Tuple&)> f) {
    return FuncSpec{in, out, std::move(f)};
}

/// Scalar function of n arguments.
inline FuncSpec scalar(std::size_t in, std::function<Int(const Tuple&)> f) {
    return FuncSpec{in, 1, [f = std::move(f)](const Tuple& t) { return Tuple{f(t)}; }};
}

inline FuncSpec identity(std::size_t n) {
    return FuncSpec{n, n, [](const Tuple& t) { return t; }};
}

/// p_i : Z^n -> Z.
inline FuncSpec projection(std::size_t n, std::size_t i) {
    if (i >= n) throw std::out_of_range("boxview: projection index");
    return FuncSpec{n, 1, [i](const Tuple& t) { return Tuple{t[i]}; }};
}

/// g o f.
inline FuncSpec compose(FuncSpec g, FuncSpec f) {
    if (g.in_arity != f.out_arity) throw std::invalid_argument("boxview: composition arity mismatch");
    std::size_t in = f.in_arity, out = g.out_arity;
    return FuncSpec{in, out, [g = std::move(g), f = std::move(f)](const Tuple& t) { return g(f(t)); }};
}

/// f x g acting on concatenated arguments.
inline FuncSpec product(FuncSpec f, FuncSpec g) {
    std::size_t in = f.in_arity + g.in_arity, out = f.out_arity + g.out_arity;
    std::size_t split = f.in_arity;
    return FuncSpec{in, out, [f = std::move(f), g = std::move(g), split](const Tuple& t) {
                        Tuple a(t.begin(), t.begin() + split), b(t.begin() + split, t.end());
                        Tuple r = f(a);
                        Tuple rb = g(b);
                        r.insert(r.end(), rb.begin(), rb.end());
                        return r;
                    }};
}

/// <f_1(x), ..., f_k(x)> for scalar or tuple components over the same input.
inline FuncSpec pairing(std::vector<FuncSpec> fs) {
    if (fs.empty()) throw std::invalid_argument("boxview: empty pairing");
    std::size_t in = fs.front().in_arity, out = 0;
    for (const auto& f : fs) {
        if (f.in_arity != in) throw std::invalid_argument("boxview: pairing arity mismatch");
        out += f.out_arity;
    }
    return FuncSpec{in, out, [fs = std::move(fs)](const Tuple& t) {
                        Tuple r;
                        for (const auto& f : fs) {
                            Tuple p = f(t);
                            r.insert(r.end(), p.begin(), p.end());
                        }
                        return r;
                    }};
}

struct ConstraintExt {
    std::size_t arity = 0;
    std::function<bool(const Tuple&)> member;

    bool operator()(const Tuple& t) const { return t.size() == arity && member(t); }
};

/// c o f as a constraint on the inputs of f.
inline ConstraintExt compose(const ConstraintExt& c, const FuncSpec& f) {
    if (c.arity != f.out_arity) throw std::invalid_argument("boxview: composition arity mismatch");
    return ConstraintExt{f.in_arity, [c, f](const Tuple& t) { return c(f(t)); }};
}

/// Explicit extension of c within a universe.
inline TupleSet extension(const ConstraintExt& c, const Box& universe) {
    TupleSet r(c.arity);
    for (const auto& t : box_tuples(universe))
        if (c(t)) r.insert(t);
    return r;
}

inline TupleSet image(const FuncSpec& f, const TupleSet& s) {
    if (!s.empty() && s.arity() != f.in_arity) throw std::invalid_argument("boxview: image arity mismatch");
    TupleSet r(f.out_arity);
    for (const auto& t : s) r.insert(f(t));
    return r;
}

inline TupleSet preimage(const FuncSpec& f, const TupleSet& s, const Box& universe) {
    if (universe.arity() != f.in_arity) throw std::invalid_argument("boxview: universe arity mismatch");
    if (!s.empty() && s.arity() != f.out_arity) throw std::invalid_argument("boxview: preimage arity mismatch");
    TupleSet r(f.in_arity);
    if (s.empty()) return r;
    for (const auto& t : box_tuples(universe))
        if (s.contains(f(t))) r.insert(t);
    return r;
}

/// phi^-(s2) restricted to s1.
inline TupleSet contracting_object(const FuncSpec& f, const TupleSet& s2, const TupleSet& s1) {
    if (!s1.empty() && s1.arity() != f.in_arity) throw std::invalid_argument("boxview: arity mismatch");
    if (s1.empty()) return TupleSet(f.in_arity);
    return preimage(f, s2, beta_approx(s1)).intersect(s1);
}

inline TupleSet exact_fixpoint(const ConstraintExt& c, const TupleSet& s) {
    if (!s.empty() && s.arity() != c.arity) throw std::invalid_argument("boxview: arity mismatch");
    TupleSet r(c.arity);
    for (const auto& t : s)
        if (c(t)) r.insert(t);
    return r;
}

/// (con(c) ∩ s^phi)^psi: the loosest fixpoint a phi-psi complete propagator may reach.
inline TupleSet phi_psi_bound(const ConstraintExt& c, const TupleSet& s, ApproxKind phi, ApproxKind psi) {
    if (phi == ApproxKind::RhoLinear || psi == ApproxKind::RhoLinear)
        throw UnsupportedKind("boxview: real relaxation is only available through rho_box_linear");
    return approx(exact_fixpoint(c, approx(s, phi)), psi);
}

/// phi_f^-( pi*_c( phi_f^+(s) ) ) ∩ s.
inline TupleSet view_propagate(const ConstraintExt& c, const FuncSpec& f, const TupleSet& s) {
    if (c.arity != f.out_arity) throw std::invalid_argument("boxview: arity mismatch");
    return contracting_object(f, exact_fixpoint(c, image(f, s)), s);
}

using BoxPass = std::function<Box(const Box&)>;

/// beta-beta fixpoint of c on a box: the hull of its solutions.
inline Box bb_fixpoint(const ConstraintExt& c, const Box& b) {
    return beta_approx(exact_fixpoint(c, box_tuples(b)));
}

/// The two projection rules of a bounds propagator for [k*u = z], applied once.
inline BoxPass single_pass_scaled_eq(Int k) {
    return [k](const Box& b) {
        Box r = b;
        if (b.empty()) return r;
        Interval u = b[0], z = b[1];
        Int p = mul_checked(k, u.lo), q = mul_checked(k, u.hi);
        z = z.intersect(Interval{std::min(p, q), std::max(p, q)});
        r[1] = z;
        if (z.empty()) return Box::empty_box(2);
        Interval back = k > 0 ? Interval{ceil_div(z.lo, k), floor_div(z.hi, k)}
                              : Interval{ceil_div(z.hi, k), floor_div(z.lo, k)};
        r[0] = u.intersect(back);
        return r;
    };
}

/// Box view propagation: beta-hat_f( inner( beta_f^+(s) ), s ) ∩ s. With
/// inner_idempotent the inner step is the exact beta-beta fixpoint of c;
/// otherwise `single_pass` is applied once.
inline TupleSet box_view_propagate_ref(const ConstraintExt& c, const FuncSpec& f, const TupleSet& s,
                                       bool inner_idempotent, const BoxPass& single_pass = {}) {
    if (c.arity != f.out_arity) throw std::invalid_argument("boxview: arity mismatch");
    if (s.empty()) return s;
    Box hull = beta_approx(s);
    Box fplus = beta_approx(image(f, box_tuples(hull)));
    Box inner;
    if (inner_idempotent) {
        inner = bb_fixpoint(c, fplus);
    } else {
        if (!single_pass) throw std::invalid_argument("boxview: non-idempotent mode needs a propagation pass");
        inner = single_pass(fplus);
    }
    if (inner.empty()) return TupleSet(s.arity());
    TupleSet pre = preimage(f, box_tuples(inner), hull).intersect(s);
    return box_tuples(beta_approx(pre)).intersect(s);
}

/// Bounds of the real solutions of sum(a_i x_i) = rhs inside the real hull of
/// b, rounded inward to integers. One pass, exact rational arithmetic.
inline Box rho_box_linear(const std::vector<Int>& coeffs, Int rhs, const Box& b) {
    if (coeffs.size() != b.arity()) throw std::invalid_argument("boxview: coefficient count mismatch");
    if (b.empty()) return b;
    std::vector<Interval> terms;
    Int lo = 0, hi = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        Int p = mul_checked(coeffs[i], b[i].lo), q = mul_checked(coeffs[i], b[i].hi);
        terms.emplace_back(std::min(p, q), std::max(p, q));
        lo = add_checked(lo, terms.back().lo);
        hi = add_checked(hi, terms.back().hi);
    }
    if (rhs < lo || rhs > hi) return Box::empty_box(b.arity());
    std::vector<Interval> out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        Int a = coeffs[i];
        if (a == 0) {
            out.push_back(b[i]);
            continue;
        }
        // a*x_i in [rhs - (hi - t.hi), rhs - (lo - t.lo)]
        Int p = rhs - (hi - terms[i].hi), q = rhs - (lo - terms[i].lo);
        Interval r = a > 0 ? Interval{ceil_div(p, a), floor_div(q, a)} : Interval{ceil_div(q, a), floor_div(p, a)};
        out.push_back(b[i].intersect(r));
    }
    return Box(std::move(out));
}

// ---------------------------------------------------------------------------
// Propagator checking

using PropagatorSpec = std::function<TupleSet(const TupleSet&)>;

struct CheckReport {
    std::string name;
    ApproxKind phi = ApproxKind::Beta;
    ApproxKind psi = ApproxKind::Beta;
    bool contracting = true;
    bool sound = true;
    bool complete = true;
    bool exhaustive = true;
    std::size_t cases = 0;
    std::string counterexample;

    bool ok(bool need_complete = true) const { return contracting && sound && (complete || !need_complete); }
};

struct CheckOptions {
    std::size_t max_cases = 200'000;  // above this, domains are sampled
    std::uint64_t seed = 1;
    std::size_t fixpoint_rounds = 64;
};

namespace detail {

inline std::vector<Interval> sub_intervals(const Interval& u) {
    std::vector<Interval> out;
    for (Int a = u.lo; a <= u.hi; ++a)
        for (Int b = a; b <= u.hi; ++b) out.emplace_back(a, b);
    return out;
}

inline std::vector<std::vector<Int>> nonempty_subsets(const Interval& u) {
    std::vector<Int> vals;
    for (Int v = u.lo; v <= u.hi; ++v) vals.push_back(v);
    std::vector<std::vector<Int>> out;
    if (vals.size() > 20) throw std::length_error("boxview: dimension too wide for subset enumeration");
    for (std::uint32_t mask = 1; mask < (1u << vals.size()); ++mask) {
        std::vector<Int> s;
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (mask & (1u << i)) s.push_back(vals[i]);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::string describe(const TupleSet& s) {
    std::ostringstream os;
    os << s;
    return os.str();
}

/// Calls f on each Phi-domain inside the universe, exhaustively or sampled.
inline bool for_each_domain(const Box& universe, ApproxKind phi, const CheckOptions& opt,
                            const std::function<void(const TupleSet&)>& f) {
    SeededRng rng(opt.seed);
    const std::size_t n = universe.arity();
    if (phi == ApproxKind::Identity) {
        TupleSet all = box_tuples(universe);
        std::vector<Tuple> ts(all.begin(), all.end());
        bool exhaustive = ts.size() < 63 && (std::uint64_t{1} << ts.size()) <= opt.max_cases;
        std::uint64_t count = exhaustive ? (std::uint64_t{1} << ts.size()) : opt.max_cases;
        for (std::uint64_t c = 0; c < count; ++c) {
            TupleSet s(n);
            for (std::size_t i = 0; i < ts.size(); ++i) {
                bool in = exhaustive ? ((c >> i) & 1) : (rng.next() & 1);
                if (in) s.insert(ts[i]);
            }
            f(s);
        }
        return exhaustive;
    }
    using Choice = std::vector<std::vector<Int>>;
    std::vector<Choice> choices(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (phi == ApproxKind::Beta) {
            for (const auto& iv : sub_intervals(universe[i])) {
                std::vector<Int> vs;
                for (Int v = iv.lo; v <= iv.hi; ++v) vs.push_back(v);
                choices[i].push_back(std::move(vs));
            }
        } else if (phi == ApproxKind::Delta) {
            choices[i] = nonempty_subsets(universe[i]);
        } else {
            throw UnsupportedKind("boxview: checker enumerates identity, delta and beta domains only");
        }
    }
    std::uint64_t total = 1;
    bool exhaustive = true;
    for (const auto& c : choices) {
        if (__builtin_mul_overflow(total, c.size(), &total) || total > opt.max_cases) {
            exhaustive = false;
            break;
        }
    }
    auto emit = [&](const std::vector<std::size_t>& pick) {
        std::vector<std::vector<Int>> dims;
        for (std::size_t i = 0; i < n; ++i) dims.push_back(choices[i][pick[i]]);
        f(cartesian(dims));
    };
    std::vector<std::size_t> pick(n, 0);
    if (!exhaustive) {
        for (std::size_t c = 0; c < opt.max_cases; ++c) {
            for (std::size_t i = 0; i < n; ++i) pick[i] = static_cast<std::size_t>(rng.uniform(0, choices[i].size() - 1));
            emit(pick);
        }
        return false;
    }
    while (true) {
        emit(pick);
        std::size_t k = 0;
        while (k < n) {
            if (++pick[k] < choices[k].size()) break;
            pick[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    return true;
}

}  // namespace detail

/// Checks contraction and soundness of one application, and that the
/// fixpoint of repeated application stays within the phi-psi bound.
inline CheckReport check_propagator(const std::string& name, const PropagatorSpec& p, const ConstraintExt& c,
                                    ApproxKind phi, ApproxKind psi, const Box& universe,
                                    const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.name = name;
    rep.phi = phi;
    rep.psi = psi;
    rep.exhaustive = detail::for_each_domain(universe, phi, opt, [&](const TupleSet& s) {
        ++rep.cases;
        TupleSet once = p(s);
        TupleSet sol = exact_fixpoint(c, s);
        if (rep.contracting && !once.subset_of(s)) {
            rep.contracting = false;
            if (rep.counterexample.empty()) rep.counterexample = "not contracting on " + detail::describe(s);
        }
        if (rep.sound && !sol.subset_of(once)) {
            rep.sound = false;
            if (rep.counterexample.empty()) rep.counterexample = "unsound on " + detail::describe(s);
        }
        TupleSet fix = once;
        for (std::size_t r = 0; r < opt.fixpoint_rounds; ++r) {
            TupleSet next = p(fix);
            if (next == fix) break;
            fix = next;
        }
        TupleSet bound = phi_psi_bound(c, s, phi, psi);
        if (rep.complete && !fix.subset_of(bound)) {
            rep.complete = false;
            if (rep.counterexample.empty())
                rep.counterexample = "incomplete on " + detail::describe(s) + ": got " + detail::describe(fix);
        }
    });
    return rep;
}

/// Wraps an engine propagator as a box-to-box function on tuple sets. The
/// input must be a box; `post` adds the propagator over the given variables.
inline PropagatorSpec engine_propagator(std::function<void(Store&, const std::vector<VarId>&)> post) {
    return [post = std::move(post)](const TupleSet& s) {
        if (s.empty()) return s;
        Box b = beta_approx(s);
        if (box_tuples(b).size() != s.size())
            throw std::invalid_argument("boxview: engine propagators take box-shaped inputs");
        Store st;
        std::vector<VarId> vars;
        for (const auto& d : b.dims()) vars.push_back(st.new_var(d.lo, d.hi));
        post(st, vars);
        if (!st.fixpoint()) return TupleSet(s.arity());
        std::vector<Interval> dims;
        for (VarId v : vars) dims.push_back(st.domain(v));
        return box_tuples(Box(std::move(dims)));
    };
}

}  // namespace boxview::oracle
