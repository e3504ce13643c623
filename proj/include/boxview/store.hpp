#pragma once

// Variable store: interval domains, trail, subscriptions, the propagation
// queue and the instrumentation counters.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "boxview/approx.hpp"
#include "boxview/common.hpp"

namespace boxview {

using EventMask = unsigned;

namespace event {
inline constexpr EventMask kMin = 1;
inline constexpr EventMask kMax = 2;
inline constexpr EventMask kGround = 4;
inline constexpr EventMask kBounds = kMin | kMax;
inline constexpr EventMask kAll = kMin | kMax | kGround;

/// A min event on -x is a max event on x.
constexpr EventMask mirror(EventMask e) {
    return (e & kGround) | ((e & kMin) ? kMax : 0u) | ((e & kMax) ? kMin : 0u);
}
}  // namespace event

struct VarId {
    int index = -1;
    friend constexpr auto operator<=>(VarId, VarId) = default;
};

using PropId = int;

/// Subscription of a propagator to events of one variable.
struct VarEvent {
    int var = -1;
    EventMask events = 0;
    friend constexpr auto operator<=>(const VarEvent&, const VarEvent&) = default;
};

/// Merges duplicates (same variable) by or-ing their masks; result sorted by variable.
inline std::vector<VarEvent> normalize_triggers(std::vector<VarEvent> v) {
    std::sort(v.begin(), v.end());
    std::vector<VarEvent> out;
    for (const auto& ve : v) {
        if (ve.events == 0) continue;
        if (!out.empty() && out.back().var == ve.var)
            out.back().events |= ve.events;
        else
            out.push_back(ve);
    }
    return out;
}

enum class Status { Failed, Idempotent, Suspend };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Failed: return "failed";
        case Status::Idempotent: return "idempotent";
        case Status::Suspend: return "suspend";
    }
    return "?";
}

struct SearchStats {
    std::uint64_t propagations = 0;    // p
    double time_ms = 0.0;              // t
    std::uint64_t fails = 0;           // f
    std::uint64_t domain_updates = 0;  // u
    std::uint64_t view_calls = 0;      // calls
    std::uint64_t arith_ops = 0;       // op
    std::uint64_t solutions = 0;
    std::uint64_t nodes = 0;
};

class Store;

class Propagator {
public:
    virtual ~Propagator() = default;
    virtual Status execute() = 0;
    /// Variable events this propagator must be woken on. With full=false the
    /// result may be narrower because of ground conditions (trigger moving).
    virtual void triggers(std::vector<VarEvent>& out, bool full) const = 0;
    virtual bool moves_triggers() const { return false; }
    virtual const char* name() const = 0;
};

struct StoreOptions {
    bool view_cache = true;  // per-execution bound caching in n-ary sum views
};

class Store {
public:
    Store() = default;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    VarId new_var(Int lo, Int hi, std::string name = {}) {
        if (lo > hi) throw std::invalid_argument("boxview: new_var with lo > hi");
        VarId id{static_cast<int>(doms_.size())};
        doms_.push_back(Interval{lo, hi});
        stamp_.push_back(-1);
        subs_.emplace_back();
        if (name.empty()) name = "v" + std::to_string(id.index);
        names_.push_back(std::move(name));
        return id;
    }

    std::size_t num_vars() const { return doms_.size(); }
    const std::string& name(VarId v) const { return names_.at(v.index); }
    Interval domain(VarId v) const { return doms_[v.index]; }
    Int min(VarId v) const { return doms_[v.index].lo; }
    Int max(VarId v) const { return doms_[v.index].hi; }
    bool ground(VarId v) const { return doms_[v.index].lo == doms_[v.index].hi; }
    bool failed() const { return failed_; }

    /// Returns false iff the update empties the domain (the store is then failed).
    bool upd_min(VarId v, Int i) {
        Interval& d = doms_[v.index];
        if (i <= d.lo) return true;
        if (i > d.hi) return fail();
        save(v.index);
        d.lo = i;
        notify(v.index, d.lo == d.hi ? (event::kMin | event::kGround) : event::kMin);
        return true;
    }

    bool upd_max(VarId v, Int i) {
        Interval& d = doms_[v.index];
        if (i >= d.hi) return true;
        if (i < d.lo) return fail();
        save(v.index);
        d.hi = i;
        notify(v.index, d.lo == d.hi ? (event::kMax | event::kGround) : event::kMax);
        return true;
    }

    /// Registers a propagator and schedules it, without running the queue.
    PropId add(std::unique_ptr<Propagator> p) {
        PropId id = static_cast<PropId>(props_.size());
        std::vector<VarEvent> trig;
        p->triggers(trig, true);
        props_.push_back(std::move(p));
        in_queue_.push_back(0);
        prop_subs_.emplace_back();
        for (const auto& ve : normalize_triggers(std::move(trig))) attach(id, ve);
        schedule(id);
        return id;
    }

    /// Registers, schedules and propagates to fixpoint. False on failure.
    bool post(std::unique_ptr<Propagator> p) {
        add(std::move(p));
        return fixpoint();
    }

    void schedule(PropId p) {
        if (in_queue_[p]) return;
        in_queue_[p] = 1;
        queue_.push_back(p);
    }

    void schedule_all() {
        for (PropId p = 0; p < static_cast<PropId>(props_.size()); ++p) schedule(p);
    }

    bool fixpoint() {
        if (failed_) {
            clear_queue();
            return false;
        }
        while (!queue_.empty()) {
            PropId p = queue_.front();
            queue_.pop_front();
            in_queue_[p] = 0;
            current_ = p;
            self_notified_ = false;
            ++stats_.propagations;
            Status st = props_[p]->execute();
            current_ = -1;
            if (st == Status::Failed || failed_) {
                failed_ = true;
                clear_queue();
                return false;
            }
            if (st == Status::Suspend && self_notified_) schedule(p);
            if (props_[p]->moves_triggers()) refresh_triggers(p);
        }
        return true;
    }

    std::size_t num_propagators() const { return props_.size(); }
    Propagator& propagator(PropId p) { return *props_.at(p); }

    /// Active subscriptions of a propagator (after trigger moving).
    std::vector<VarEvent> active_triggers(PropId p) const {
        std::vector<VarEvent> out;
        for (const auto& [var, idx] : prop_subs_.at(p)) {
            const Sub& s = subs_[var][idx];
            if (s.active) out.push_back({var, s.mask});
        }
        return normalize_triggers(std::move(out));
    }

    void push() {
        marks_.push_back(trail_.size());
        cp_stack_.push_back(cp_);
        cp_ = ++cp_counter_;
    }

    void pop() {
        if (marks_.empty()) throw std::logic_error("boxview: pop without push");
        std::size_t mark = marks_.back();
        marks_.pop_back();
        while (trail_.size() > mark) {
            const TrailEntry& e = trail_.back();
            if (e.is_sub) {
                subs_[e.var][e.sub_index].active = e.old_active;
            } else {
                doms_[e.var] = e.old;
                stamp_[e.var] = e.old_stamp;
            }
            trail_.pop_back();
        }
        cp_ = cp_stack_.back();
        cp_stack_.pop_back();
        failed_ = false;
        clear_queue();
        ++version_;
    }

    int level() const { return static_cast<int>(marks_.size()); }

    /// Changes on every domain modification and every pop.
    std::uint64_t version() const { return version_; }

    SearchStats& stats() { return stats_; }
    const SearchStats& stats() const { return stats_; }
    StoreOptions& options() { return options_; }
    const StoreOptions& options() const { return options_; }

    void count_ops(std::uint64_t n) { stats_.arith_ops += n; }
    void count_call() { ++stats_.view_calls; }

private:
    struct Sub {
        PropId prop;
        EventMask mask;
        bool active;
    };

    struct TrailEntry {
        int var;
        bool is_sub;
        Interval old;
        std::int64_t old_stamp;
        int sub_index;
        bool old_active;
    };

    bool fail() {
        failed_ = true;
        return false;
    }

    void clear_queue() {
        for (PropId p : queue_) in_queue_[p] = 0;
        queue_.clear();
    }

    void save(int var) {
        ++stats_.domain_updates;
        ++version_;
        if (stamp_[var] == cp_ || marks_.empty()) return;
        trail_.push_back(TrailEntry{var, false, doms_[var], stamp_[var], 0, false});
        stamp_[var] = cp_;
    }

    void notify(int var, EventMask ev) {
        for (const Sub& s : subs_[var]) {
            if (!s.active || !(s.mask & ev)) continue;
            if (s.prop == current_)
                self_notified_ = true;
            else
                schedule(s.prop);
        }
    }

    void attach(PropId p, VarEvent ve) {
        subs_[ve.var].push_back(Sub{p, ve.events, true});
        prop_subs_[p].emplace_back(ve.var, static_cast<int>(subs_[ve.var].size() - 1));
    }

    void set_active(int var, int idx, bool active) {
        Sub& s = subs_[var][idx];
        if (s.active == active) return;
        if (!marks_.empty()) trail_.push_back(TrailEntry{var, true, {}, 0, idx, s.active});
        s.active = active;
    }

    void refresh_triggers(PropId p) {
        std::vector<VarEvent> want;
        props_[p]->triggers(want, false);
        want = normalize_triggers(std::move(want));
        std::vector<char> covered(want.size(), 0);
        for (const auto& [var, idx] : prop_subs_[p]) {
            const Sub& s = subs_[var][idx];
            auto it = std::lower_bound(want.begin(), want.end(), VarEvent{var, 0},
                                       [](const VarEvent& a, const VarEvent& b) { return a.var < b.var; });
            bool keep = it != want.end() && it->var == var && (it->events & s.mask) == s.mask;
            if (keep) covered[it - want.begin()] = 1;
            set_active(var, idx, keep);
        }
        for (std::size_t i = 0; i < want.size(); ++i)
            if (!covered[i]) attach(p, want[i]);
    }

    std::vector<Interval> doms_;
    std::vector<std::int64_t> stamp_;
    std::vector<std::string> names_;
    std::vector<std::vector<Sub>> subs_;
    std::vector<std::unique_ptr<Propagator>> props_;
    std::vector<std::vector<std::pair<int, int>>> prop_subs_;
    std::vector<char> in_queue_;
    std::deque<PropId> queue_;
    std::vector<TrailEntry> trail_;
    std::vector<std::size_t> marks_;
    std::vector<std::int64_t> cp_stack_;
    std::int64_t cp_ = 0;
    std::int64_t cp_counter_ = 0;
    PropId current_ = -1;
    bool self_notified_ = false;
    bool failed_ = false;
    std::uint64_t version_ = 0;
    SearchStats stats_;
    StoreOptions options_;
};

}  // namespace boxview
