#pragma once

// Box views: bounds access and bounds update over expressions.
//
// Every expression kind is written once, as a class template over its child
// view types. Composing the templates directly gives compile-time specialized
// views (ViewsStatic); instantiating them over DynBox children and wrapping
// each node in DynAdapter gives runtime-dispatched views (ViewsDynamic). Both
// realizations therefore execute the same bound arithmetic.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "boxview/common.hpp"
#include "boxview/store.hpp"

namespace boxview {

template <class V>
concept BoxView = requires(const V v, Int i, EventMask e, std::vector<VarEvent>& out, bool full) {
    { v.get_min() } -> std::same_as<Int>;
    { v.get_max() } -> std::same_as<Int>;
    { v.upd_min(i) } -> std::same_as<bool>;
    { v.upd_max(i) } -> std::same_as<bool>;
    { v.triggers(e, out, full) };
    { v.store() } -> std::same_as<Store&>;
};

/// Bounds of a view as an interval. Views whose two bounds share work
/// provide bounds() to compute them in one pass.
template <BoxView V>
Interval bounds(const V& v) {
    if constexpr (requires { { v.bounds() } -> std::same_as<Interval>; })
        return v.bounds();
    else
        return Interval{v.get_min(), v.get_max()};
}

/// Expression-level trigger expanded to variable subscriptions.
template <BoxView V>
std::vector<VarEvent> trigger_map(const V& v, EventMask ev, bool full = true) {
    std::vector<VarEvent> out;
    v.triggers(ev, out, full);
    return normalize_triggers(std::move(out));
}

namespace detail {
/// Nonlinear nodes depend on both bounds of their children.
inline EventMask widen(EventMask ev) {
    EventMask r = ev & event::kGround;
    if (ev & event::kBounds) r |= event::kBounds;
    return r;
}
}  // namespace detail

class Var {
public:
    Var(Store& s, VarId v) : s_(&s), v_(v) {}
    Int get_min() const { return s_->min(v_); }
    Int get_max() const { return s_->max(v_); }
    bool upd_min(Int i) const { return s_->upd_min(v_, i); }
    bool upd_max(Int i) const { return s_->upd_max(v_, i); }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool) const { out.push_back({v_.index, ev}); }
    Store& store() const { return *s_; }
    VarId id() const { return v_; }

private:
    Store* s_;
    VarId v_;
};

class Const {
public:
    Const(Store& s, Int k) : s_(&s), k_(k) {}
    Int get_min() const { return k_; }
    Int get_max() const { return k_; }
    bool upd_min(Int i) const { return i <= k_; }
    bool upd_max(Int i) const { return i >= k_; }
    void triggers(EventMask, std::vector<VarEvent>&, bool) const {}
    Store& store() const { return *s_; }
    Int value() const { return k_; }

private:
    Store* s_;
    Int k_;
};

/// Constant interval right-hand side (e.g. `sum in [lo..hi]`).
class Range {
public:
    Range(Store& s, Int lo, Int hi) : s_(&s), lo_(lo), hi_(hi) {}
    Int get_min() const { return lo_; }
    Int get_max() const { return hi_; }
    bool upd_min(Int i) const { return i <= hi_; }
    bool upd_max(Int i) const { return i >= lo_; }
    void triggers(EventMask, std::vector<VarEvent>&, bool) const {}
    Store& store() const { return *s_; }

private:
    Store* s_;
    Int lo_, hi_;
};

/// Upper bound shared with a branch-and-bound driver.
class BoundRef {
public:
    BoundRef(Store& s, std::shared_ptr<Int> bound) : s_(&s), bound_(std::move(bound)) {}
    Int get_min() const { return *bound_; }
    Int get_max() const { return *bound_; }
    bool upd_min(Int i) const { return i <= *bound_; }
    bool upd_max(Int i) const { return i >= *bound_; }
    void triggers(EventMask, std::vector<VarEvent>&, bool) const {}
    Store& store() const { return *s_; }

private:
    Store* s_;
    std::shared_ptr<Int> bound_;
};

template <BoxView X, BoxView Y>
class Add {
public:
    Add(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const {
        store().count_ops(1);
        return add_checked(x_.get_min(), y_.get_min());
    }
    Int get_max() const {
        store().count_ops(1);
        return add_checked(x_.get_max(), y_.get_max());
    }
    Interval bounds() const {
        store().count_ops(2);
        Interval a = boxview::bounds(x_), b = boxview::bounds(y_);
        return Interval{add_checked(a.lo, b.lo), add_checked(a.hi, b.hi)};
    }
    bool upd_min(Int i) const {
        store().count_ops(2);
        return x_.upd_min(sub_checked(i, y_.get_max())) && y_.upd_min(sub_checked(i, x_.get_max()));
    }
    bool upd_max(Int i) const {
        store().count_ops(2);
        return x_.upd_max(sub_checked(i, y_.get_min())) && y_.upd_max(sub_checked(i, x_.get_min()));
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(ev, out, full);
        y_.triggers(ev, out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

template <BoxView X, BoxView Y>
class Sub {
public:
    Sub(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const {
        store().count_ops(1);
        return sub_checked(x_.get_min(), y_.get_max());
    }
    Int get_max() const {
        store().count_ops(1);
        return sub_checked(x_.get_max(), y_.get_min());
    }
    Interval bounds() const {
        store().count_ops(2);
        Interval a = boxview::bounds(x_), b = boxview::bounds(y_);
        return Interval{sub_checked(a.lo, b.hi), sub_checked(a.hi, b.lo)};
    }
    // x - y >= i  ==>  x >= i + y.min,  y <= x.max - i
    bool upd_min(Int i) const {
        store().count_ops(2);
        return x_.upd_min(add_checked(i, y_.get_min())) && y_.upd_max(sub_checked(x_.get_max(), i));
    }
    bool upd_max(Int i) const {
        store().count_ops(2);
        return x_.upd_max(add_checked(i, y_.get_max())) && y_.upd_min(sub_checked(x_.get_min(), i));
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(ev, out, full);
        y_.triggers(event::mirror(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

template <BoxView X>
class Neg {
public:
    explicit Neg(X x) : x_(std::move(x)) {}
    Int get_min() const {
        store().count_ops(1);
        return neg_checked(x_.get_max());
    }
    Int get_max() const {
        store().count_ops(1);
        return neg_checked(x_.get_min());
    }
    bool upd_min(Int i) const {
        store().count_ops(1);
        return x_.upd_max(neg_checked(i));
    }
    bool upd_max(Int i) const {
        store().count_ops(1);
        return x_.upd_min(neg_checked(i));
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(event::mirror(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
};

/// a * x for a constant coefficient a != 0.
template <BoxView X>
class Lin {
public:
    Lin(Int a, X x) : a_(a), x_(std::move(x)) {
        if (a_ == 0) throw std::invalid_argument("boxview: linear term with zero coefficient");
    }
    Int get_min() const {
        store().count_ops(1);
        return mul_checked(a_, a_ > 0 ? x_.get_min() : x_.get_max());
    }
    Int get_max() const {
        store().count_ops(1);
        return mul_checked(a_, a_ > 0 ? x_.get_max() : x_.get_min());
    }
    bool upd_min(Int i) const {
        store().count_ops(1);
        return a_ > 0 ? x_.upd_min(ceil_div(i, a_)) : x_.upd_max(floor_div(i, a_));
    }
    bool upd_max(Int i) const {
        store().count_ops(1);
        return a_ > 0 ? x_.upd_max(floor_div(i, a_)) : x_.upd_min(ceil_div(i, a_));
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(a_ > 0 ? ev : event::mirror(ev), out, full);
    }
    Store& store() const { return x_.store(); }
    Int coefficient() const { return a_; }

private:
    Int a_;
    X x_;
};

namespace detail {

/// Values of x admitted by `exists y in co : x*y in [zlo..zhi]`, as a
/// (possibly half-open) interval relaxation. Missing z bounds are unbounded.
struct FactorBounds {
    bool infeasible = false;
    bool has_lo = false, has_hi = false;
    Int lo = 0, hi = 0;
};

inline FactorBounds factor_bounds(Interval co, bool has_zlo, Int zlo, bool has_zhi, Int zhi) {
    FactorBounds r;
    bool zero_ok = (!has_zlo || zlo <= 0) && (!has_zhi || zhi >= 0);
    Int ylo = co.lo, yhi = co.hi;
    if (ylo < 0 && yhi > 0) return r;
    if (ylo == 0 && yhi == 0) {
        r.infeasible = !zero_ok;
        return r;
    }
    if (ylo == 0) {
        if (zero_ok) return r;
        ylo = 1;
    }
    if (yhi == 0) {
        if (zero_ok) return r;
        yhi = -1;
    }
    if (ylo > 0) {
        if (has_zlo) {
            r.has_lo = true;
            r.lo = ceil_div(zlo, zlo >= 0 ? yhi : ylo);
        }
        if (has_zhi) {
            r.has_hi = true;
            r.hi = floor_div(zhi, zhi >= 0 ? ylo : yhi);
        }
    } else {
        if (has_zlo) {
            r.has_hi = true;
            r.hi = floor_div(zlo, zlo >= 0 ? ylo : yhi);
        }
        if (has_zhi) {
            r.has_lo = true;
            r.lo = ceil_div(zhi, zhi >= 0 ? yhi : ylo);
        }
    }
    return r;
}

template <BoxView X>
bool apply_factor(const X& x, const FactorBounds& fb) {
    if (fb.infeasible) return x.upd_min(add_checked(x.get_max(), 1));
    if (fb.has_lo && !x.upd_min(fb.lo)) return false;
    if (fb.has_hi && !x.upd_max(fb.hi)) return false;
    return true;
}

inline Interval product_hull(Interval a, Interval b) {
    if (a.lo >= 0 && b.lo >= 0) return Interval{mul_checked(a.lo, b.lo), mul_checked(a.hi, b.hi)};
    Int p1 = mul_checked(a.lo, b.lo), p2 = mul_checked(a.lo, b.hi);
    Int p3 = mul_checked(a.hi, b.lo), p4 = mul_checked(a.hi, b.hi);
    return Interval{std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval square_hull(Interval a) {
    if (a.lo >= 0) return Interval{mul_checked(a.lo, a.lo), mul_checked(a.hi, a.hi)};
    if (a.hi <= 0) return Interval{mul_checked(a.hi, a.hi), mul_checked(a.lo, a.lo)};
    Int m = std::max(-a.lo, a.hi);
    return Interval{0, mul_checked(m, m)};
}

inline Interval abs_hull(Interval a) {
    if (a.lo > 0) return a;
    if (a.hi < 0) return Interval{neg_checked(a.hi), neg_checked(a.lo)};
    return Interval{0, std::max(neg_checked(a.lo), a.hi)};
}

/// Restricts x to values whose magnitude is at least r (r > 0).
template <BoxView X>
bool magnitude_at_least(const X& x, Int r) {
    if (x.get_min() > -r && !x.upd_min(r)) return false;
    if (x.get_max() < r && !x.upd_max(-r)) return false;
    return true;
}

}  // namespace detail

template <BoxView X, BoxView Y>
class Mul {
public:
    Mul(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const { return hull().lo; }
    Int get_max() const { return hull().hi; }
    Interval bounds() const { return hull(); }
    bool upd_min(Int i) const { return narrow(true, i, false, 0); }
    bool upd_max(Int i) const { return narrow(false, 0, true, i); }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    Interval hull() const {
        store().count_ops(4);
        return detail::product_hull(boxview::bounds(x_), boxview::bounds(y_));
    }

    bool narrow(bool has_lo, Int lo, bool has_hi, Int hi) const {
        Interval h = hull();
        if ((!has_lo || lo <= h.lo) && (!has_hi || hi >= h.hi)) return true;
        if ((has_lo && lo > h.hi) || (has_hi && hi < h.lo)) {
            // no support at all: empty the first factor
            return x_.upd_min(add_checked(x_.get_max(), 1));
        }
        store().count_ops(4);
        if (!detail::apply_factor(x_, detail::factor_bounds(boxview::bounds(y_), has_lo, lo, has_hi, hi))) return false;
        return detail::apply_factor(y_, detail::factor_bounds(boxview::bounds(x_), has_lo, lo, has_hi, hi));
    }

    X x_;
    Y y_;
};

template <BoxView X>
class Sqr {
public:
    explicit Sqr(X x) : x_(std::move(x)) {}
    Int get_min() const {
        store().count_ops(2);
        return detail::square_hull(boxview::bounds(x_)).lo;
    }
    Int get_max() const {
        store().count_ops(2);
        return detail::square_hull(boxview::bounds(x_)).hi;
    }
    Interval bounds() const {
        store().count_ops(2);
        return detail::square_hull(boxview::bounds(x_));
    }
    bool upd_min(Int i) const {
        if (i <= 0) return true;
        store().count_ops(2);
        return detail::magnitude_at_least(x_, isqrt_ceil(i));
    }
    bool upd_max(Int i) const {
        if (i < 0) return x_.upd_min(add_checked(x_.get_max(), 1));
        store().count_ops(2);
        Int r = isqrt_floor(i);
        Interval b = boxview::bounds(x_);
        return (b.lo >= -r || x_.upd_min(-r)) && (b.hi <= r || x_.upd_max(r));
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
};

template <BoxView X>
class Abs {
public:
    explicit Abs(X x) : x_(std::move(x)) {}
    Int get_min() const {
        store().count_ops(1);
        return detail::abs_hull(boxview::bounds(x_)).lo;
    }
    Int get_max() const {
        store().count_ops(1);
        return detail::abs_hull(boxview::bounds(x_)).hi;
    }
    Interval bounds() const {
        store().count_ops(1);
        return detail::abs_hull(boxview::bounds(x_));
    }
    // Requested lower bounds below zero are clamped to zero.
    bool upd_min(Int i) const {
        if (i <= 0) return true;
        store().count_ops(1);
        return detail::magnitude_at_least(x_, i);
    }
    bool upd_max(Int i) const {
        if (i < 0) return x_.upd_min(add_checked(x_.get_max(), 1));
        store().count_ops(1);
        Int lo = x_.get_min(), hi = x_.get_max();
        if (lo > 0) return x_.upd_max(i);
        if (hi < 0) return x_.upd_min(neg_checked(i));
        return x_.upd_min(neg_checked(i)) && x_.upd_max(i);
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
};

template <BoxView X, BoxView Y>
class Min2 {
public:
    Min2(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const {
        store().count_ops(1);
        return std::min(x_.get_min(), y_.get_min());
    }
    Int get_max() const {
        store().count_ops(1);
        return std::min(x_.get_max(), y_.get_max());
    }
    bool upd_min(Int i) const { return x_.upd_min(i) && y_.upd_min(i); }
    bool upd_max(Int i) const {
        store().count_ops(2);
        if (y_.get_min() > i && !x_.upd_max(i)) return false;
        if (x_.get_min() > i && !y_.upd_max(i)) return false;
        return true;
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

template <BoxView X, BoxView Y>
class Max2 {
public:
    Max2(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const {
        store().count_ops(1);
        return std::max(x_.get_min(), y_.get_min());
    }
    Int get_max() const {
        store().count_ops(1);
        return std::max(x_.get_max(), y_.get_max());
    }
    bool upd_min(Int i) const {
        store().count_ops(2);
        if (y_.get_max() < i && !x_.upd_min(i)) return false;
        if (x_.get_max() < i && !y_.upd_min(i)) return false;
        return true;
    }
    bool upd_max(Int i) const { return x_.upd_max(i) && y_.upd_max(i); }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

/// n-ary sum. With StoreOptions::view_cache the children's bound sums are
/// cached until the store changes; the cache is never trailed.
template <BoxView X>
class SumN {
public:
    explicit SumN(std::vector<X> xs) : xs_(std::make_shared<const std::vector<X>>(std::move(xs))) {
        if (xs_->empty()) throw std::invalid_argument("boxview: empty sum");
    }
    Int get_min() const { return sums().lo; }
    Int get_max() const { return sums().hi; }
    Interval bounds() const { return sums(); }
    bool upd_min(Int i) const {
        const auto& xs = *xs_;
        if (store().options().view_cache) {
            Int smax = sums().hi;
            for (const auto& x : xs) {
                store().count_ops(2);
                Interval b = boxview::bounds(x);
                Int t = sub_checked(i, sub_checked(smax, b.hi));
                if (t > b.lo && !x.upd_min(t)) return false;
            }
            return true;
        }
        for (std::size_t k = 0; k < xs.size(); ++k) {
            Int rest = 0;
            for (std::size_t j = 0; j < xs.size(); ++j)
                if (j != k) rest = add_checked(rest, xs[j].get_max());
            store().count_ops(xs.size());
            if (!xs[k].upd_min(sub_checked(i, rest))) return false;
        }
        return true;
    }
    bool upd_max(Int i) const {
        const auto& xs = *xs_;
        if (store().options().view_cache) {
            Int smin = sums().lo;
            for (const auto& x : xs) {
                store().count_ops(2);
                Interval b = boxview::bounds(x);
                Int t = sub_checked(i, sub_checked(smin, b.lo));
                if (t < b.hi && !x.upd_max(t)) return false;
            }
            return true;
        }
        for (std::size_t k = 0; k < xs.size(); ++k) {
            Int rest = 0;
            for (std::size_t j = 0; j < xs.size(); ++j)
                if (j != k) rest = add_checked(rest, xs[j].get_min());
            store().count_ops(xs.size());
            if (!xs[k].upd_max(sub_checked(i, rest))) return false;
        }
        return true;
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        for (const auto& x : *xs_) x.triggers(ev, out, full);
    }
    Store& store() const { return xs_->front().store(); }
    const std::vector<X>& children() const { return *xs_; }

private:
    Interval sums() const {
        Store& s = store();
        if (s.options().view_cache && cache_version_ == s.version() && cache_owner_ == &s) return cache_;
        Int lo = 0, hi = 0;
        for (const auto& x : *xs_) {
            Interval b = boxview::bounds(x);
            lo = add_checked(lo, b.lo);
            hi = add_checked(hi, b.hi);
        }
        s.count_ops(2 * xs_->size());
        cache_ = Interval{lo, hi};
        cache_version_ = s.version();
        cache_owner_ = &s;
        return cache_;
    }

    std::shared_ptr<const std::vector<X>> xs_;
    mutable Interval cache_;
    mutable std::uint64_t cache_version_ = ~std::uint64_t{0};
    mutable const Store* cache_owner_ = nullptr;
};

namespace detail {
// Updates are only issued when they tighten, which skips the
// recursive descent of no-op requests.
template <BoxView X, BoxView Y>
bool enforce_eq(const X& x, const Y& y) {
    Interval bx = boxview::bounds(x), by = boxview::bounds(y);
    if (by.lo > bx.lo || by.hi < bx.hi) {
        if (by.lo > bx.lo && !x.upd_min(by.lo)) return false;
        if (by.hi < bx.hi && !x.upd_max(by.hi)) return false;
        bx = boxview::bounds(x);
    }
    if (bx.lo > by.lo && !y.upd_min(bx.lo)) return false;
    if (bx.hi < by.hi && !y.upd_max(bx.hi)) return false;
    return true;
}

template <BoxView X, BoxView Y>
bool enforce_neq(const X& x, const Y& y) {
    if (y.get_min() == y.get_max()) {
        Int v = y.get_min();
        if (x.get_min() == v && !x.upd_min(add_checked(v, 1))) return false;
        if (x.get_max() == v && !x.upd_max(sub_checked(v, 1))) return false;
    }
    if (x.get_min() == x.get_max()) {
        Int v = x.get_min();
        if (y.get_min() == v && !y.upd_min(add_checked(v, 1))) return false;
        if (y.get_max() == v && !y.upd_max(sub_checked(v, 1))) return false;
    }
    return true;
}

// x <= y
template <BoxView X, BoxView Y>
bool enforce_leq(const X& x, const Y& y) {
    Int ymax = y.get_max();
    if (ymax < x.get_max() && !x.upd_max(ymax)) return false;
    Int xmin = x.get_min();
    return xmin <= y.get_min() || y.upd_min(xmin);
}

// x > y
template <BoxView X, BoxView Y>
bool enforce_gt(const X& x, const Y& y) {
    return x.upd_min(add_checked(y.get_min(), 1)) && y.upd_max(sub_checked(x.get_max(), 1));
}

/// Shared 0/1 update protocol for reified relations.
template <class Pos, class NegF>
bool reif_upd_min(Int i, Pos&& pos, NegF&&) {
    if (i <= 0) return true;
    if (i > 1) return false;
    return pos();
}
template <class Pos, class NegF>
bool reif_upd_max(Int i, Pos&&, NegF&& neg) {
    if (i >= 1) return true;
    if (i < 0) return false;
    return neg();
}
}  // namespace detail

/// (x = y) as a 0/1 expression.
template <BoxView X, BoxView Y>
class ReifEq {
public:
    ReifEq(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const {
        Int a = x_.get_min(), b = y_.get_min();
        return (a == x_.get_max() && b == y_.get_max() && a == b) ? 1 : 0;
    }
    Int get_max() const { return (x_.get_max() < y_.get_min() || y_.get_max() < x_.get_min()) ? 0 : 1; }
    bool upd_min(Int i) const {
        return detail::reif_upd_min(i, [&] { return detail::enforce_eq(x_, y_); }, [] { return true; });
    }
    bool upd_max(Int i) const {
        return detail::reif_upd_max(i, [] { return true; }, [&] { return detail::enforce_neq(x_, y_); });
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

/// (x != y) as a 0/1 expression.
template <BoxView X, BoxView Y>
class ReifNeq {
public:
    ReifNeq(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const { return (x_.get_max() < y_.get_min() || y_.get_max() < x_.get_min()) ? 1 : 0; }
    Int get_max() const {
        Int a = x_.get_min(), b = y_.get_min();
        return (a == x_.get_max() && b == y_.get_max() && a == b) ? 0 : 1;
    }
    bool upd_min(Int i) const {
        return detail::reif_upd_min(i, [&] { return detail::enforce_neq(x_, y_); }, [] { return true; });
    }
    bool upd_max(Int i) const {
        return detail::reif_upd_max(i, [] { return true; }, [&] { return detail::enforce_eq(x_, y_); });
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

/// (x <= y) as a 0/1 expression.
template <BoxView X, BoxView Y>
class ReifLeq {
public:
    ReifLeq(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Int get_min() const { return x_.get_max() <= y_.get_min() ? 1 : 0; }
    Int get_max() const { return x_.get_min() > y_.get_max() ? 0 : 1; }
    bool upd_min(Int i) const {
        return detail::reif_upd_min(i, [&] { return detail::enforce_leq(x_, y_); }, [] { return true; });
    }
    bool upd_max(Int i) const {
        return detail::reif_upd_max(i, [] { return true; }, [&] { return detail::enforce_gt(x_, y_); });
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        x_.triggers(detail::widen(ev), out, full);
        y_.triggers(detail::widen(ev), out, full);
    }
    Store& store() const { return x_.store(); }

private:
    X x_;
    Y y_;
};

/// The box T when C holds, F when it does not, their hull while C is open.
template <BoxView C, BoxView T, BoxView F>
class IfThenElse {
public:
    IfThenElse(C c, T t, F f) : c_(std::move(c)), t_(std::move(t)), f_(std::move(f)) {}
    Int get_min() const {
        if (is_true()) return t_.get_min();
        if (is_false()) return f_.get_min();
        return std::min(t_.get_min(), f_.get_min());
    }
    Int get_max() const {
        if (is_true()) return t_.get_max();
        if (is_false()) return f_.get_max();
        return std::max(t_.get_max(), f_.get_max());
    }
    bool upd_min(Int i) const {
        if (is_true()) return t_.upd_min(i);
        if (is_false()) return f_.upd_min(i);
        if (t_.get_max() < i) return c_.upd_max(0) && f_.upd_min(i);
        if (f_.get_max() < i) return c_.upd_min(1) && t_.upd_min(i);
        return true;
    }
    bool upd_max(Int i) const {
        if (is_true()) return t_.upd_max(i);
        if (is_false()) return f_.upd_max(i);
        if (t_.get_min() > i) return c_.upd_max(0) && f_.upd_max(i);
        if (f_.get_min() > i) return c_.upd_min(1) && t_.upd_max(i);
        return true;
    }
    // Once C is ground (checked through its bounds, never assumed from an
    // earlier update) only the selected branch needs to be watched.
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
        c_.triggers(event::kBounds, out, full);
        bool ground = !full && c_.get_min() == c_.get_max();
        if (!ground || is_true()) t_.triggers(ev, out, full);
        if (!ground || is_false()) f_.triggers(ev, out, full);
    }
    Store& store() const { return c_.store(); }
    bool has_moving_triggers() const { return true; }

private:
    bool is_true() const { return c_.get_min() >= 1; }
    bool is_false() const { return c_.get_max() <= 0; }

    C c_;
    T t_;
    F f_;
};

// ---------------------------------------------------------------------------
// Runtime dispatch

class DynView {
public:
    virtual ~DynView() = default;
    virtual Int get_min() const = 0;
    virtual Int get_max() const = 0;
    virtual Interval bounds() const = 0;
    virtual bool upd_min(Int i) const = 0;
    virtual bool upd_max(Int i) const = 0;
    virtual void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const = 0;
    virtual bool has_moving_triggers() const = 0;
};

/// Handle to a runtime-dispatched view; each bound method invocation is one
/// counted view call.
class DynBox {
public:
    DynBox(Store& s, std::shared_ptr<const DynView> impl) : s_(&s), impl_(std::move(impl)) {}
    Int get_min() const {
        s_->count_call();
        return impl_->get_min();
    }
    Int get_max() const {
        s_->count_call();
        return impl_->get_max();
    }
    Interval bounds() const {
        s_->count_call();
        return impl_->bounds();
    }
    bool upd_min(Int i) const {
        s_->count_call();
        return impl_->upd_min(i);
    }
    bool upd_max(Int i) const {
        s_->count_call();
        return impl_->upd_max(i);
    }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const { impl_->triggers(ev, out, full); }
    Store& store() const { return *s_; }
    bool has_moving_triggers() const { return impl_->has_moving_triggers(); }

private:
    Store* s_;
    std::shared_ptr<const DynView> impl_;
};

template <BoxView V>
class DynAdapter final : public DynView {
public:
    DynAdapter(V v, bool moving) : v_(std::move(v)), moving_(moving) {}
    Int get_min() const override { return v_.get_min(); }
    Int get_max() const override { return v_.get_max(); }
    Interval bounds() const override { return boxview::bounds(v_); }
    bool upd_min(Int i) const override { return v_.upd_min(i); }
    bool upd_max(Int i) const override { return v_.upd_max(i); }
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const override { v_.triggers(ev, out, full); }
    bool has_moving_triggers() const override { return moving_; }

private:
    V v_;
    bool moving_;
};

template <BoxView V>
DynBox make_dyn(V v, bool moving_triggers = false) {
    Store& s = v.store();
    return DynBox(s, std::make_shared<DynAdapter<V>>(std::move(v), moving_triggers));
}

// ---------------------------------------------------------------------------
// Convenience constructors for typed (compile-time composed) views.

template <BoxView X, BoxView Y>
Add<X, Y> add(X x, Y y) {
    return {std::move(x), std::move(y)};
}
template <BoxView X, BoxView Y>
Sub<X, Y> sub(X x, Y y) {
    return {std::move(x), std::move(y)};
}
template <BoxView X, BoxView Y>
Mul<X, Y> mul(X x, Y y) {
    return {std::move(x), std::move(y)};
}

}  // namespace boxview
