#pragma once

// Tuple sets, intervals, boxes and the Cartesian / box approximation
// operators over them.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxview/common.hpp"

namespace boxview {

/// Closed integer interval [lo..hi]. Any interval with lo > hi is empty and
/// all empty intervals compare equal; the canonical empty form is [1..0].
struct Interval {
    Int lo = 1;
    Int hi = 0;

    constexpr Interval() = default;
    constexpr Interval(Int l, Int h) : lo(l), hi(h) {
        if (lo > hi) {
            lo = 1;
            hi = 0;
        }
    }

    static constexpr Interval empty_interval() { return Interval{}; }
    static constexpr Interval singleton(Int v) { return Interval{v, v}; }

    constexpr bool empty() const { return lo > hi; }
    constexpr bool ground() const { return lo == hi; }
    constexpr bool contains(Int v) const { return lo <= v && v <= hi; }
    constexpr bool contains(const Interval& o) const {
        return o.empty() || (!empty() && lo <= o.lo && o.hi <= hi);
    }

    /// Number of values; saturates at kIntMax.
    Int width() const {
        if (empty()) return 0;
        Int w;
        if (__builtin_sub_overflow(hi, lo, &w) || w == kIntMax) return kIntMax;
        return w + 1;
    }

    constexpr Interval intersect(const Interval& o) const {
        if (empty() || o.empty()) return {};
        return Interval{std::max(lo, o.lo), std::min(hi, o.hi)};
    }

    constexpr Interval hull(const Interval& o) const {
        if (empty()) return o;
        if (o.empty()) return *this;
        return Interval{std::min(lo, o.lo), std::max(hi, o.hi)};
    }

    friend constexpr bool operator==(const Interval& a, const Interval& b) {
        if (a.empty() || b.empty()) return a.empty() && b.empty();
        return a.lo == b.lo && a.hi == b.hi;
    }
};

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
    if (iv.empty()) return os << "[]";
    return os << '[' << iv.lo << ".." << iv.hi << ']';
}

using Tuple = std::vector<Int>;

/// Materializing a box or Cartesian product larger than this is an error.
inline constexpr std::size_t kMaxUniverse = 1'000'000;

/// Dimension-wise product of intervals. Empty iff some dimension is empty.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> dims) : dims_(std::move(dims)) {}
    Box(std::initializer_list<Interval> dims) : dims_(dims) {}

    static Box empty_box(std::size_t arity) { return Box(std::vector<Interval>(arity)); }

    std::size_t arity() const { return dims_.size(); }
    bool empty() const {
        return std::any_of(dims_.begin(), dims_.end(), [](const Interval& d) { return d.empty(); });
    }
    const Interval& operator[](std::size_t i) const { return dims_.at(i); }
    Interval& operator[](std::size_t i) { return dims_.at(i); }
    const std::vector<Interval>& dims() const { return dims_; }

    bool contains(std::span<const Int> t) const {
        if (t.size() != dims_.size()) return false;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (!dims_[i].contains(t[i])) return false;
        return true;
    }

    bool contains(const Box& o) const {
        if (o.empty()) return true;
        if (o.arity() != arity() || empty()) return false;
        for (std::size_t i = 0; i < arity(); ++i)
            if (!dims_[i].contains(o.dims_[i])) return false;
        return true;
    }

    /// Number of tuples, saturating at kIntMax.
    Int volume() const {
        if (empty()) return 0;
        Int v = 1;
        for (const auto& d : dims_) {
            if (__builtin_mul_overflow(v, d.width(), &v)) return kIntMax;
        }
        return v;
    }

    friend bool operator==(const Box& a, const Box& b) {
        if (a.arity() != b.arity()) return false;
        if (a.empty() || b.empty()) return a.empty() && b.empty();
        return a.dims_ == b.dims_;
    }

private:
    std::vector<Interval> dims_;
};

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
    for (std::size_t i = 0; i < b.arity(); ++i) {
        if (i) os << 'x';
        os << b[i];
    }
    return os;
}

/// Finite set of integer tuples of one arity.
class TupleSet {
public:
    TupleSet() = default;
    explicit TupleSet(std::size_t arity) : arity_(arity) {}
    TupleSet(std::size_t arity, std::initializer_list<Tuple> tuples) : arity_(arity) {
        for (const auto& t : tuples) insert(t);
    }

    std::size_t arity() const { return arity_; }
    std::size_t size() const { return tuples_.size(); }
    bool empty() const { return tuples_.empty(); }

    void insert(Tuple t) {
        if (t.size() != arity_) throw std::invalid_argument("boxview: tuple arity mismatch");
        tuples_.insert(std::move(t));
    }
    bool contains(const Tuple& t) const { return tuples_.count(t) != 0; }

    auto begin() const { return tuples_.begin(); }
    auto end() const { return tuples_.end(); }

    bool subset_of(const TupleSet& o) const {
        if (empty()) return true;
        if (arity_ != o.arity_) return false;
        return std::includes(o.tuples_.begin(), o.tuples_.end(), tuples_.begin(), tuples_.end());
    }

    TupleSet intersect(const TupleSet& o) const {
        if (arity_ != o.arity_) throw std::invalid_argument("boxview: tuple set arity mismatch");
        TupleSet r(arity_);
        std::set_intersection(tuples_.begin(), tuples_.end(), o.tuples_.begin(), o.tuples_.end(),
                              std::inserter(r.tuples_, r.tuples_.end()));
        return r;
    }

    TupleSet unite(const TupleSet& o) const {
        if (arity_ != o.arity_) throw std::invalid_argument("boxview: tuple set arity mismatch");
        TupleSet r = *this;
        r.tuples_.insert(o.tuples_.begin(), o.tuples_.end());
        return r;
    }

    /// Values taken by dimension i.
    std::set<Int> projection(std::size_t i) const {
        if (i >= arity_) throw std::out_of_range("boxview: projection index");
        std::set<Int> r;
        for (const auto& t : tuples_) r.insert(t[i]);
        return r;
    }

    friend bool operator==(const TupleSet& a, const TupleSet& b) {
        if (a.empty() && b.empty()) return true;
        return a.arity_ == b.arity_ && a.tuples_ == b.tuples_;
    }

private:
    std::size_t arity_ = 0;
    std::set<Tuple> tuples_;
};

inline std::ostream& operator<<(std::ostream& os, const TupleSet& s) {
    os << '{';
    bool first = true;
    for (const auto& t : s) {
        if (!first) os << ',';
        first = false;
        os << '<';
        for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
        os << '>';
    }
    return os << '}';
}

enum class ApproxKind { Identity, Delta, Beta, RhoLinear };

inline const char* to_string(ApproxKind k) {
    switch (k) {
        case ApproxKind::Identity: return "identity";
        case ApproxKind::Delta: return "delta";
        case ApproxKind::Beta: return "beta";
        case ApproxKind::RhoLinear: return "rho";
    }
    return "?";
}

class UnsupportedKind : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Convex hull of a set of values; the empty set gives the empty interval.
template <class Range>
Interval conv(const Range& values) {
    auto it = std::begin(values);
    if (it == std::end(values)) return {};
    Int lo = *it, hi = *it;
    for (; it != std::end(values); ++it) {
        lo = std::min<Int>(lo, *it);
        hi = std::max<Int>(hi, *it);
    }
    return {lo, hi};
}

inline Interval conv(std::initializer_list<Int> values) { return conv<std::initializer_list<Int>>(values); }

/// Cartesian product of per-dimension value lists as a TupleSet.
inline TupleSet cartesian(const std::vector<std::vector<Int>>& dims) {
    TupleSet r(dims.size());
    std::size_t total = 1;
    for (const auto& d : dims) {
        if (d.empty()) return r;
        if (__builtin_mul_overflow(total, d.size(), &total) || total > kMaxUniverse)
            throw std::length_error("boxview: tuple universe exceeds materialization cap");
    }
    Tuple t(dims.size());
    std::vector<std::size_t> idx(dims.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < dims.size(); ++i) t[i] = dims[i][idx[i]];
        r.insert(t);
        std::size_t k = 0;
        while (k < dims.size()) {
            if (++idx[k] < dims[k].size()) break;
            idx[k] = 0;
            ++k;
        }
        if (k == dims.size()) break;
    }
    return r;
}

/// All tuples of a box. Throws std::length_error above kMaxUniverse.
inline TupleSet box_tuples(const Box& b) {
    if (b.empty()) return TupleSet(b.arity());
    if (b.volume() > static_cast<Int>(kMaxUniverse))
        throw std::length_error("boxview: tuple universe exceeds materialization cap");
    std::vector<std::vector<Int>> dims;
    for (const auto& d : b.dims()) {
        std::vector<Int> vs;
        for (Int v = d.lo; v <= d.hi; ++v) vs.push_back(v);
        dims.push_back(std::move(vs));
    }
    return cartesian(dims);
}

inline TupleSet delta_approx(const TupleSet& s) {
    if (s.empty()) return TupleSet(s.arity());
    std::vector<std::vector<Int>> dims;
    for (std::size_t i = 0; i < s.arity(); ++i) {
        auto p = s.projection(i);
        dims.emplace_back(p.begin(), p.end());
    }
    return cartesian(dims);
}

inline Box beta_approx(const TupleSet& s) {
    if (s.empty()) return Box::empty_box(s.arity());
    std::vector<Interval> dims;
    for (std::size_t i = 0; i < s.arity(); ++i) dims.push_back(conv(s.projection(i)));
    return Box(std::move(dims));
}

inline TupleSet approx(const TupleSet& s, ApproxKind kind) {
    switch (kind) {
        case ApproxKind::Identity: return s;
        case ApproxKind::Delta: return delta_approx(s);
        case ApproxKind::Beta: return box_tuples(beta_approx(s));
        case ApproxKind::RhoLinear: break;
    }
    throw UnsupportedKind("boxview: real box approximation is only available through rho_box_linear");
}

inline bool is_phi_domain(const TupleSet& s, ApproxKind kind) { return approx(s, kind) == s; }

inline Box intersect_box(const Box& a, const Box& b) {
    if (a.arity() != b.arity()) throw std::invalid_argument("boxview: box arity mismatch");
    std::vector<Interval> dims;
    for (std::size_t i = 0; i < a.arity(); ++i) dims.push_back(a[i].intersect(b[i]));
    return Box(std::move(dims));
}

}  // namespace boxview
