#pragma once

// Depth-first search and branch-and-bound minimization over a Store.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "boxview/propagators.hpp"
#include "boxview/store.hpp"

namespace boxview {

enum class VarSelect { InputOrder, FirstFail };
enum class ValueSelect { MinValue, Bisect };

struct Brancher {
    std::vector<VarId> vars;
    VarSelect var_select = VarSelect::InputOrder;
    ValueSelect value_select = ValueSelect::MinValue;
};

struct SearchLimits {
    double time_limit_ms = 0;        // 0 = unlimited
    std::uint64_t max_solutions = 0;  // 0 = all
};

enum class SearchStatus { Complete, Stopped, Timeout };

struct SearchResult {
    SearchStatus status = SearchStatus::Complete;
    SearchStats stats;
    std::optional<std::vector<Int>> last_solution;  // values of every store variable
    std::optional<Int> objective;
};

/// Receives each solution; returning false stops the search.
using SolutionCallback = std::function<bool(const Store&)>;

inline std::vector<Int> snapshot(const Store& s) {
    std::vector<Int> out;
    out.reserve(s.num_vars());
    for (std::size_t i = 0; i < s.num_vars(); ++i) out.push_back(s.min(VarId{static_cast<int>(i)}));
    return out;
}

namespace detail {

class Dfs {
public:
    Dfs(Store& s, const Brancher& b, SearchLimits lim, SolutionCallback cb, std::optional<PropId> every_node)
        : s_(s), b_(b), lim_(lim), cb_(std::move(cb)), every_node_(every_node) {}

    SearchStatus run() {
        start_ = std::chrono::steady_clock::now();
        node();
        return status_;
    }

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool stopped() const { return status_ != SearchStatus::Complete; }

    std::optional<VarId> select() const {
        std::optional<VarId> best;
        Int best_w = 0;
        for (VarId v : b_.vars) {
            if (s_.ground(v)) continue;
            if (b_.var_select == VarSelect::InputOrder) return v;
            Int w = s_.domain(v).width();
            if (!best || w < best_w) {
                best = v;
                best_w = w;
            }
        }
        return best;
    }

    void node() {
        ++s_.stats().nodes;
        if (lim_.time_limit_ms > 0 && elapsed_ms() > lim_.time_limit_ms) {
            status_ = SearchStatus::Timeout;
            return;
        }
        if (every_node_) s_.schedule(*every_node_);
        if (!s_.fixpoint()) {
            ++s_.stats().fails;
            return;
        }
        auto v = select();
        if (!v) {
            ++s_.stats().solutions;
            if (!cb_(s_) || (lim_.max_solutions && s_.stats().solutions >= lim_.max_solutions))
                status_ = SearchStatus::Stopped;
            return;
        }
        Interval d = s_.domain(*v);
        Int split = b_.value_select == ValueSelect::MinValue ? d.lo : floor_div(add_checked(d.lo, d.hi), 2);
        s_.push();
        s_.upd_max(*v, split);
        node();
        s_.pop();
        if (stopped()) return;
        s_.push();
        s_.upd_min(*v, split + 1);
        node();
        s_.pop();
    }

    Store& s_;
    const Brancher& b_;
    SearchLimits lim_;
    SolutionCallback cb_;
    std::optional<PropId> every_node_;
    std::chrono::steady_clock::time_point start_;
    SearchStatus status_ = SearchStatus::Complete;
};

}  // namespace detail

/// Complete depth-first search. Time covers the search only.
inline SearchResult dfs(Store& s, const Brancher& b, const SolutionCallback& on_solution = {},
                        SearchLimits lim = {}) {
    SearchResult r;
    detail::Dfs d(s, b, lim,
                  [&](const Store& st) {
                      r.last_solution = snapshot(st);
                      return on_solution ? on_solution(st) : true;
                  },
                  std::nullopt);
    r.status = d.run();
    r.stats = s.stats();
    r.stats.time_ms = d.elapsed_ms();
    return r;
}

/// Minimizes obj: each solution of value v tightens the shared bound to v-1.
/// The bound propagator is scheduled at every node since the bound changes
/// without a variable event.
template <BoxView V>
SearchResult branch_and_bound_min(Store& s, V obj, const Brancher& b, SearchLimits lim = {},
                                  const SolutionCallback& on_solution = {}) {
    auto bound = std::make_shared<Int>(kIntMax);
    PropId bp = s.add(leq(obj, BoundRef(s, bound)));
    SearchResult r;
    detail::Dfs d(s, b, lim,
                  [&](const Store& st) {
                      Int v = obj.get_min();
                      r.last_solution = snapshot(st);
                      r.objective = v;
                      *bound = v - 1;
                      return on_solution ? on_solution(st) : true;
                  },
                  bp);
    r.status = d.run();
    r.stats = s.stats();
    r.stats.time_ms = d.elapsed_ms();
    return r;
}

}  // namespace boxview
