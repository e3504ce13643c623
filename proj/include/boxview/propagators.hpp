#pragma once

// Propagators over box views. Each execution runs to a local fixpoint: it
// repeats its pass until the pass leaves the store unchanged.

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include "boxview/store.hpp"
#include "boxview/view_node.hpp"
#include "boxview/views.hpp"

namespace boxview {

namespace detail {

template <BoxView V>
void add_triggers(const V& v, EventMask ev, std::vector<VarEvent>& out, bool full) {
    v.triggers(ev, out, full);
}

/// Runs pass() until it leaves the store unchanged. Returns false on failure.
template <class Pass>
bool local_fixpoint(Store& s, Pass&& pass) {
    while (true) {
        auto before = s.version();
        if (!pass() || s.failed()) return false;
        if (s.version() == before) return true;
    }
}

}  // namespace detail

/// X = Y at bounds strength.
template <BoxView X, BoxView Y>
class EqProp final : public Propagator {
public:
    EqProp(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Status execute() override {
        if (!detail::local_fixpoint(x_.store(), [&] { return detail::enforce_eq(x_, y_); })) return Status::Failed;
        bool agree = x_.get_min() == y_.get_min() && x_.get_max() == y_.get_max();
        return agree ? Status::Idempotent : Status::Suspend;
    }
    void triggers(std::vector<VarEvent>& out, bool full) const override {
        x_.triggers(event::kBounds, out, full);
        y_.triggers(event::kBounds, out, full);
    }
    bool moves_triggers() const override { return boxview::moves_triggers(x_) || boxview::moves_triggers(y_); }
    const char* name() const override { return "eq"; }

private:
    X x_;
    Y y_;
};

/// X <= Y.
template <BoxView X, BoxView Y>
class LeqProp final : public Propagator {
public:
    LeqProp(X x, Y y) : x_(std::move(x)), y_(std::move(y)) {}
    Status execute() override {
        if (!detail::local_fixpoint(x_.store(), [&] { return detail::enforce_leq(x_, y_); })) return Status::Failed;
        if (x_.get_max() <= y_.get_min()) return Status::Idempotent;
        return Status::Suspend;
    }
    void triggers(std::vector<VarEvent>& out, bool full) const override {
        x_.triggers(event::kMin, out, full);
        y_.triggers(event::kMax, out, full);
    }
    bool moves_triggers() const override { return boxview::moves_triggers(x_) || boxview::moves_triggers(y_); }
    const char* name() const override { return "leq"; }

private:
    X x_;
    Y y_;
};

/// X != k. Only prunes k when it is a bound; Idempotent only when a re-read
/// shows the bounds have moved past k.
template <BoxView X>
class NeqProp final : public Propagator {
public:
    NeqProp(X x, Int k) : x_(std::move(x)), k_(k) {}
    Status execute() override {
        if (x_.get_min() == k_ && !x_.upd_min(add_checked(k_, 1))) return Status::Failed;
        if (x_.get_max() == k_ && !x_.upd_max(sub_checked(k_, 1))) return Status::Failed;
        return (x_.get_min() > k_ || x_.get_max() < k_) ? Status::Idempotent : Status::Suspend;
    }
    void triggers(std::vector<VarEvent>& out, bool full) const override { x_.triggers(event::kBounds, out, full); }
    bool moves_triggers() const override { return boxview::moves_triggers(x_); }
    const char* name() const override { return "neq"; }

private:
    X x_;
    Int k_;
};

/// sum(xs) = K at bounds strength.
template <BoxView X, BoxView K>
class SumEqProp final : public Propagator {
public:
    SumEqProp(std::vector<X> xs, K k) : xs_(std::move(xs)), k_(std::move(k)) {
        if (xs_.empty()) throw std::invalid_argument("boxview: sum_eq needs at least one term");
    }
    Status execute() override {
        Store& s = k_.store();
        bool ok = detail::local_fixpoint(s, [&] {
            Int smin = 0, smax = 0;
            for (const auto& x : xs_) {
                smin = add_checked(smin, x.get_min());
                smax = add_checked(smax, x.get_max());
            }
            s.count_ops(2 * xs_.size());
            if (!k_.upd_min(smin) || !k_.upd_max(smax)) return false;
            Int klo = k_.get_min(), khi = k_.get_max();
            for (const auto& x : xs_) {
                Int xlo = x.get_min(), xhi = x.get_max();
                s.count_ops(4);
                if (!x.upd_min(sub_checked(klo, sub_checked(smax, xhi)))) return false;
                if (!x.upd_max(sub_checked(khi, sub_checked(smin, xlo)))) return false;
            }
            return true;
        });
        return ok ? Status::Idempotent : Status::Failed;
    }
    void triggers(std::vector<VarEvent>& out, bool full) const override {
        for (const auto& x : xs_) x.triggers(event::kBounds, out, full);
        k_.triggers(event::kBounds, out, full);
    }
    bool moves_triggers() const override {
        return boxview::moves_triggers(k_) ||
               std::any_of(xs_.begin(), xs_.end(), [](const X& x) { return boxview::moves_triggers(x); });
    }
    const char* name() const override { return "sum_eq"; }

private:
    std::vector<X> xs_;
    K k_;
};

/// sum(a_i * x_i) = rhs. Bounds reasoning on local copies of the view
/// bounds, followed by support shaving when the reachable sums are small,
/// which makes the propagator complete for integer bounds.
template <BoxView X>
class LinearEqProp final : public Propagator {
public:
    static constexpr std::uint64_t kShaveBudget = 20'000'000;

    LinearEqProp(std::vector<Int> coeffs, std::vector<X> xs, Int rhs)
        : a_(std::move(coeffs)), xs_(std::move(xs)), rhs_(rhs) {
        if (a_.size() != xs_.size() || xs_.empty())
            throw std::invalid_argument("boxview: linear_eq needs one coefficient per term");
        for (Int a : a_)
            if (a == 0) throw std::invalid_argument("boxview: linear_eq with zero coefficient");
    }

    Status execute() override {
        Store& s = xs_.front().store();
        std::vector<Interval> loc(xs_.size());
        bool ok = detail::local_fixpoint(s, [&] {
            for (std::size_t i = 0; i < xs_.size(); ++i) loc[i] = bounds(xs_[i]);
            if (!narrow(loc, s)) return false;
            for (std::size_t i = 0; i < xs_.size(); ++i)
                if (!xs_[i].upd_min(loc[i].lo) || !xs_[i].upd_max(loc[i].hi)) return false;
            return true;
        });
        return ok ? Status::Idempotent : Status::Failed;
    }

    void triggers(std::vector<VarEvent>& out, bool full) const override {
        for (const auto& x : xs_) x.triggers(event::kBounds, out, full);
    }
    bool moves_triggers() const override {
        return std::any_of(xs_.begin(), xs_.end(), [](const X& x) { return boxview::moves_triggers(x); });
    }
    const char* name() const override { return "linear_eq"; }

private:
    Interval term(std::size_t i, const Interval& d) const {
        Int p = mul_checked(a_[i], d.lo), q = mul_checked(a_[i], d.hi);
        return Interval{std::min(p, q), std::max(p, q)};
    }

    bool bounds_pass(std::vector<Interval>& loc, Store& s) const {
        bool changed = true;
        while (changed) {
            changed = false;
            Int slo = 0, shi = 0;
            for (std::size_t i = 0; i < loc.size(); ++i) {
                Interval t = term(i, loc[i]);
                slo = add_checked(slo, t.lo);
                shi = add_checked(shi, t.hi);
            }
            s.count_ops(4 * loc.size());
            for (std::size_t i = 0; i < loc.size(); ++i) {
                Interval t = term(i, loc[i]);
                Int p = sub_checked(rhs_, sub_checked(shi, t.hi));
                Int q = sub_checked(rhs_, sub_checked(slo, t.lo));
                Interval r = a_[i] > 0 ? Interval{ceil_div(p, a_[i]), floor_div(q, a_[i])}
                                       : Interval{ceil_div(q, a_[i]), floor_div(p, a_[i])};
                s.count_ops(6);
                Interval n = loc[i].intersect(r);
                if (n.empty()) return false;
                if (!(n == loc[i])) {
                    loc[i] = n;
                    changed = true;
                }
            }
        }
        return true;
    }

    // Reachable values of sum_{j != skip} a_j x_j as a bitmap starting at base.
    std::vector<char> reachable(const std::vector<Interval>& loc, std::size_t skip, Int& base) const {
        base = 0;
        Int top = 0;
        for (std::size_t j = 0; j < loc.size(); ++j) {
            if (j == skip) continue;
            Interval t = term(j, loc[j]);
            base += t.lo;
            top += t.hi;
        }
        std::vector<char> reach(static_cast<std::size_t>(top - base + 1), 0);
        reach[0] = 1;
        Int cur_hi = 0;  // offset of the highest value reached so far
        for (std::size_t j = 0; j < loc.size(); ++j) {
            if (j == skip) continue;
            Interval t = term(j, loc[j]);
            std::vector<char> next(reach.size(), 0);
            for (Int v = loc[j].lo; v <= loc[j].hi; ++v) {
                Int shift = a_[j] * v - t.lo;
                for (Int o = 0; o <= cur_hi; ++o)
                    if (reach[o]) next[o + shift] = 1;
            }
            cur_hi += t.hi - t.lo;
            reach.swap(next);
        }
        return reach;
    }

    bool shave_affordable(const std::vector<Interval>& loc) const {
        std::uint64_t span = 0, widths = 0;
        for (std::size_t i = 0; i < loc.size(); ++i) {
            Int w = loc[i].width();
            Int tw = term(i, loc[i]).width();
            if (w > 100000 || tw > 1000000) return false;
            widths += static_cast<std::uint64_t>(w);
            span += static_cast<std::uint64_t>(tw);
        }
        if (span > 1000000) return false;
        return static_cast<std::uint64_t>(loc.size()) * widths * span <= kShaveBudget;
    }

    bool shave(std::vector<Interval>& loc, Store& s, bool& changed) const {
        changed = false;
        if (loc.size() < 2 || !shave_affordable(loc)) return true;
        for (std::size_t i = 0; i < loc.size(); ++i) {
            Int base = 0;
            std::vector<char> reach = reachable(loc, i, base);
            s.count_ops(reach.size());
            auto supported = [&](Int v) {
                Int need = rhs_ - a_[i] * v - base;
                return need >= 0 && need < static_cast<Int>(reach.size()) && reach[need];
            };
            Int lo = loc[i].lo, hi = loc[i].hi;
            while (lo <= hi && !supported(lo)) ++lo;
            while (hi >= lo && !supported(hi)) --hi;
            if (lo > hi) return false;
            if (lo != loc[i].lo || hi != loc[i].hi) {
                loc[i] = Interval{lo, hi};
                changed = true;
            }
        }
        return true;
    }

    bool narrow(std::vector<Interval>& loc, Store& s) const {
        while (true) {
            if (!bounds_pass(loc, s)) return false;
            bool changed = false;
            if (!shave(loc, s, changed)) return false;
            if (!changed) return true;
        }
    }

    std::vector<Int> a_;
    std::vector<X> xs_;
    Int rhs_;
};

/// Bounds-complete alldifferent over views (Hall intervals, sorted-bounds
/// formulation with path compression). The sort permutations persist
/// between executions, so re-sorting is near-linear when few bounds moved.
template <BoxView X>
class DistinctBoundsProp final : public Propagator {
public:
    explicit DistinctBoundsProp(std::vector<X> xs) : xs_(std::move(xs)) {
        if (xs_.empty()) throw std::invalid_argument("boxview: distinct needs at least one view");
        std::size_t n = xs_.size();
        iv_.resize(n);
        minsorted_.resize(n);
        maxsorted_.resize(n);
        std::iota(minsorted_.begin(), minsorted_.end(), 0);
        std::iota(maxsorted_.begin(), maxsorted_.end(), 0);
        bounds_.resize(2 * n + 2);
        t_.resize(2 * n + 2);
        d_.resize(2 * n + 2);
        h_.resize(2 * n + 2);
    }

    Status execute() override {
        Store& s = xs_.front().store();
        bool ok = detail::local_fixpoint(s, [&] {
            for (std::size_t i = 0; i < xs_.size(); ++i) {
                iv_[i].min = xs_[i].get_min();
                iv_[i].max = xs_[i].get_max();
            }
            sort_bounds();
            s.count_ops(4 * xs_.size());
            if (!filter_lower() || !filter_upper()) {
                // over-subscribed Hall interval: empty the first view
                const X& x = xs_.front();
                x.upd_min(add_checked(x.get_max(), 1));
                return false;
            }
            for (std::size_t i = 0; i < xs_.size(); ++i)
                if (!xs_[i].upd_min(iv_[i].min) || !xs_[i].upd_max(iv_[i].max)) return false;
            return true;
        });
        return ok ? Status::Idempotent : Status::Failed;
    }

    void triggers(std::vector<VarEvent>& out, bool full) const override {
        for (const auto& x : xs_) x.triggers(event::kBounds, out, full);
    }
    bool moves_triggers() const override {
        return std::any_of(xs_.begin(), xs_.end(), [](const X& x) { return boxview::moves_triggers(x); });
    }
    const char* name() const override { return "distinct"; }

private:
    struct Iv {
        Int min = 0, max = 0;
        int minrank = 0, maxrank = 0;
    };

    static void insertion_sort(std::vector<int>& idx, auto key) {
        for (std::size_t i = 1; i < idx.size(); ++i) {
            int v = idx[i];
            std::size_t j = i;
            while (j > 0 && key(idx[j - 1]) > key(v)) {
                idx[j] = idx[j - 1];
                --j;
            }
            idx[j] = v;
        }
    }

    void sort_bounds() {
        insertion_sort(minsorted_, [&](int i) { return iv_[i].min; });
        insertion_sort(maxsorted_, [&](int i) { return iv_[i].max; });
        const int n = static_cast<int>(xs_.size());
        Int mn = iv_[minsorted_[0]].min;
        Int mx = iv_[maxsorted_[0]].max + 1;
        Int last = mn - 2;
        int nb = 0;
        bounds_[0] = last;
        int i = 0, j = 0;
        while (true) {
            if (i < n && mn <= mx) {
                if (mn != last) bounds_[++nb] = last = mn;
                iv_[minsorted_[i]].minrank = nb;
                if (++i < n) mn = iv_[minsorted_[i]].min;
            } else {
                if (mx != last) bounds_[++nb] = last = mx;
                iv_[maxsorted_[j]].maxrank = nb;
                if (++j == n) break;
                mx = iv_[maxsorted_[j]].max + 1;
            }
        }
        nb_ = nb;
        bounds_[nb + 1] = bounds_[nb] + 2;
    }

    static int pathmax(const std::vector<int>& t, int i) {
        while (t[i] > i) i = t[i];
        return i;
    }
    static int pathmin(const std::vector<int>& t, int i) {
        while (t[i] < i) i = t[i];
        return i;
    }
    static void pathset(std::vector<int>& t, int start, int end, int to) {
        int k, l = start;
        while ((k = l) != end) {
            l = t[k];
            t[k] = to;
        }
    }

    bool filter_lower() {
        for (int i = 1; i <= nb_ + 1; ++i) {
            t_[i] = h_[i] = i - 1;
            d_[i] = bounds_[i] - bounds_[i - 1];
        }
        for (int idx : maxsorted_) {
            Iv& v = iv_[idx];
            int x = v.minrank, y = v.maxrank;
            int z = pathmax(t_, x + 1);
            int j = t_[z];
            if (--d_[z] == 0) {
                t_[z] = z + 1;
                z = pathmax(t_, t_[z]);
                t_[z] = j;
            }
            pathset(t_, x + 1, z, z);
            if (d_[z] < bounds_[z] - bounds_[y]) return false;
            if (h_[x] > x) {
                int w = pathmax(h_, h_[x]);
                v.min = bounds_[w];
                pathset(h_, x, w, w);
            }
            if (d_[z] == bounds_[z] - bounds_[y]) {
                pathset(h_, h_[y], j - 1, y);
                h_[y] = j - 1;
            }
        }
        return true;
    }

    bool filter_upper() {
        for (int i = 0; i <= nb_; ++i) {
            t_[i] = h_[i] = i + 1;
            d_[i] = bounds_[i + 1] - bounds_[i];
        }
        for (auto it = minsorted_.rbegin(); it != minsorted_.rend(); ++it) {
            Iv& v = iv_[*it];
            int x = v.maxrank, y = v.minrank;
            int z = pathmin(t_, x - 1);
            int j = t_[z];
            if (--d_[z] == 0) {
                t_[z] = z - 1;
                z = pathmin(t_, t_[z]);
                t_[z] = j;
            }
            pathset(t_, x - 1, z, z);
            if (d_[z] < bounds_[y] - bounds_[z]) return false;
            if (h_[x] < x) {
                int w = pathmin(h_, h_[x]);
                v.max = bounds_[w] - 1;
                pathset(h_, x, w, w);
            }
            if (d_[z] == bounds_[y] - bounds_[z]) {
                pathset(h_, h_[y], j + 1, y);
                h_[y] = j + 1;
            }
        }
        return true;
    }

    std::vector<X> xs_;
    std::vector<Iv> iv_;
    std::vector<int> minsorted_, maxsorted_;
    std::vector<Int> bounds_, d_;
    std::vector<int> t_, h_;
    int nb_ = 0;
};

// ---------------------------------------------------------------------------
// Factories

template <BoxView X, BoxView Y>
std::unique_ptr<Propagator> eq(X x, Y y) {
    return std::make_unique<EqProp<X, Y>>(std::move(x), std::move(y));
}

template <BoxView X, BoxView Y>
std::unique_ptr<Propagator> leq(X x, Y y) {
    return std::make_unique<LeqProp<X, Y>>(std::move(x), std::move(y));
}

template <BoxView X>
std::unique_ptr<Propagator> neq(X x, Int k) {
    return std::make_unique<NeqProp<X>>(std::move(x), k);
}

template <BoxView X, BoxView K>
std::unique_ptr<Propagator> sum_eq(std::vector<X> xs, K k) {
    return std::make_unique<SumEqProp<X, K>>(std::move(xs), std::move(k));
}

template <BoxView X>
std::unique_ptr<Propagator> linear_eq(std::vector<Int> coeffs, std::vector<X> xs, Int rhs) {
    return std::make_unique<LinearEqProp<X>>(std::move(coeffs), std::move(xs), rhs);
}

/// x * y = z.
template <BoxView X, BoxView Y, BoxView Z>
std::unique_ptr<Propagator> mul_eq(X x, Y y, Z z) {
    return eq(Mul<X, Y>(std::move(x), std::move(y)), std::move(z));
}

template <BoxView X>
std::unique_ptr<Propagator> distinct_bounds(std::vector<X> xs) {
    return std::make_unique<DistinctBoundsProp<X>>(std::move(xs));
}

}  // namespace boxview
