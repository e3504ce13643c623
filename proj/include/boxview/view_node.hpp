#pragma once

// Syntactic expression trees and their two realizations as box views.

#include <cctype>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "boxview/store.hpp"
#include "boxview/views.hpp"

namespace boxview {

enum class NodeKind {
    Var,
    Const,
    Add,
    Sub,
    Neg,
    Mul,
    Abs,
    Sqr,
    Min2,
    Max2,
    LinearTerm,
    Sum,
    ReifEq,
    ReifNeq,
    ReifLeq,
    IfThenElse
};

inline const char* tag(NodeKind k) {
    switch (k) {
        case NodeKind::Var: return "var";
        case NodeKind::Const: return "const";
        case NodeKind::Add: return "add";
        case NodeKind::Sub: return "sub";
        case NodeKind::Neg: return "neg";
        case NodeKind::Mul: return "mul";
        case NodeKind::Abs: return "abs";
        case NodeKind::Sqr: return "sqr";
        case NodeKind::Min2: return "min";
        case NodeKind::Max2: return "max";
        case NodeKind::LinearTerm: return "lin";
        case NodeKind::Sum: return "sum";
        case NodeKind::ReifEq: return "reif-eq";
        case NodeKind::ReifNeq: return "reif-neq";
        case NodeKind::ReifLeq: return "reif-leq";
        case NodeKind::IfThenElse: return "ite";
    }
    return "?";
}

inline constexpr NodeKind kAllKinds[] = {
    NodeKind::Var,     NodeKind::Const,  NodeKind::Add,        NodeKind::Sub,    NodeKind::Neg,
    NodeKind::Mul,     NodeKind::Abs,    NodeKind::Sqr,        NodeKind::Min2,   NodeKind::Max2,
    NodeKind::LinearTerm, NodeKind::Sum, NodeKind::ReifEq,     NodeKind::ReifNeq, NodeKind::ReifLeq,
    NodeKind::IfThenElse};

/// Required number of children; -1 means one or more.
inline int arity(NodeKind k) {
    switch (k) {
        case NodeKind::Var:
        case NodeKind::Const: return 0;
        case NodeKind::Neg:
        case NodeKind::Abs:
        case NodeKind::Sqr:
        case NodeKind::LinearTerm: return 1;
        case NodeKind::Sum: return -1;
        case NodeKind::IfThenElse: return 3;
        default: return 2;
    }
}

inline bool is_reified(NodeKind k) {
    return k == NodeKind::ReifEq || k == NodeKind::ReifNeq || k == NodeKind::ReifLeq;
}

struct ViewNode {
    NodeKind kind = NodeKind::Const;
    std::vector<ViewNode> kids;
    Int value = 0;     // Const: the constant; LinearTerm: the coefficient
    VarId var{};       // Var
    std::string name;  // Var, for printing

    friend bool operator==(const ViewNode& a, const ViewNode& b) {
        return a.kind == b.kind && a.value == b.value && a.var == b.var && a.kids == b.kids;
    }
};

inline void validate(const ViewNode& n) {
    int a = arity(n.kind);
    bool ok = a < 0 ? !n.kids.empty() : static_cast<int>(n.kids.size()) == a;
    if (!ok) throw std::invalid_argument(std::string("boxview: wrong arity for ") + tag(n.kind));
    if (n.kind == NodeKind::LinearTerm && n.value == 0)
        throw std::invalid_argument("boxview: linear term with zero coefficient");
    for (const auto& k : n.kids) validate(k);
}

namespace vn {
inline ViewNode var(const Store& s, VarId v) { return ViewNode{NodeKind::Var, {}, 0, v, s.name(v)}; }
inline ViewNode cst(Int k) { return ViewNode{NodeKind::Const, {}, k, {}, {}}; }
inline ViewNode node(NodeKind k, std::vector<ViewNode> kids, Int value = 0) {
    ViewNode n{k, std::move(kids), value, {}, {}};
    validate(n);
    return n;
}
inline ViewNode add(ViewNode a, ViewNode b) { return node(NodeKind::Add, {std::move(a), std::move(b)}); }
inline ViewNode sub(ViewNode a, ViewNode b) { return node(NodeKind::Sub, {std::move(a), std::move(b)}); }
inline ViewNode mul(ViewNode a, ViewNode b) { return node(NodeKind::Mul, {std::move(a), std::move(b)}); }
inline ViewNode neg(ViewNode a) { return node(NodeKind::Neg, {std::move(a)}); }
inline ViewNode abs(ViewNode a) { return node(NodeKind::Abs, {std::move(a)}); }
inline ViewNode sqr(ViewNode a) { return node(NodeKind::Sqr, {std::move(a)}); }
inline ViewNode min(ViewNode a, ViewNode b) { return node(NodeKind::Min2, {std::move(a), std::move(b)}); }
inline ViewNode max(ViewNode a, ViewNode b) { return node(NodeKind::Max2, {std::move(a), std::move(b)}); }
inline ViewNode lin(Int a, ViewNode x) { return node(NodeKind::LinearTerm, {std::move(x)}, a); }
inline ViewNode sum(std::vector<ViewNode> xs) { return node(NodeKind::Sum, std::move(xs)); }
inline ViewNode reif_eq(ViewNode a, ViewNode b) { return node(NodeKind::ReifEq, {std::move(a), std::move(b)}); }
inline ViewNode reif_neq(ViewNode a, ViewNode b) { return node(NodeKind::ReifNeq, {std::move(a), std::move(b)}); }
inline ViewNode reif_leq(ViewNode a, ViewNode b) { return node(NodeKind::ReifLeq, {std::move(a), std::move(b)}); }
inline ViewNode ite(ViewNode c, ViewNode t, ViewNode f) {
    return node(NodeKind::IfThenElse, {std::move(c), std::move(t), std::move(f)});
}
}  // namespace vn

inline void write_prefix(std::ostream& os, const ViewNode& n) {
    switch (n.kind) {
        case NodeKind::Var: os << "(var " << n.name << ')'; return;
        case NodeKind::Const: os << "(const " << n.value << ')'; return;
        case NodeKind::LinearTerm: os << "(lin " << n.value; break;
        default: os << '(' << tag(n.kind); break;
    }
    for (const auto& k : n.kids) {
        os << ' ';
        write_prefix(os, k);
    }
    os << ')';
}

/// Canonical prefix form, e.g. `(add (var x1) (mul (var x2) (var x3)))`.
inline std::string to_string(const ViewNode& n) {
    std::ostringstream os;
    write_prefix(os, n);
    return os.str();
}

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// S-expression token reader shared by the view and relation parsers.
class SexpReader {
public:
    explicit SexpReader(std::string text) : text_(std::move(text)) {}

    std::string next() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("boxview: unexpected end of input");
        char c = text_[pos_];
        if (c == '(' || c == ')') {
            ++pos_;
            return std::string(1, c);
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
               text_[pos_] != ')')
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    std::string peek() {
        std::size_t save = pos_;
        std::string t = next();
        pos_ = save;
        return t;
    }

    void expect(const std::string& tok) {
        std::string t = next();
        if (t != tok) throw ParseError("boxview: expected '" + tok + "' got '" + t + "'");
    }

    Int integer() {
        std::string t = next();
        try {
            std::size_t used = 0;
            long long v = std::stoll(t, &used);
            if (used != t.size()) throw ParseError("boxview: bad integer '" + t + "'");
            return v;
        } catch (const std::logic_error&) {
            throw ParseError("boxview: bad integer '" + t + "'");
        }
    }

    bool at_end() {
        skip();
        return pos_ >= text_.size();
    }

private:
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string text_;
    std::size_t pos_ = 0;
};

using NameResolver = std::function<std::optional<VarId>(const std::string&)>;

inline NameResolver store_resolver(const Store& s) {
    return [&s](const std::string& name) -> std::optional<VarId> {
        for (std::size_t i = 0; i < s.num_vars(); ++i)
            if (s.name(VarId{static_cast<int>(i)}) == name) return VarId{static_cast<int>(i)};
        return std::nullopt;
    };
}

inline ViewNode parse_view(SexpReader& in, const NameResolver& resolve) {
    in.expect("(");
    std::string head = in.next();
    ViewNode n;
    if (head == "var") {
        n.kind = NodeKind::Var;
        n.name = in.next();
        auto id = resolve(n.name);
        if (!id) throw ParseError("boxview: unknown variable '" + n.name + "'");
        n.var = *id;
        in.expect(")");
        return n;
    }
    if (head == "const") {
        n.kind = NodeKind::Const;
        n.value = in.integer();
        in.expect(")");
        return n;
    }
    bool found = false;
    for (NodeKind k : kAllKinds) {
        if (head == tag(k)) {
            n.kind = k;
            found = true;
        }
    }
    if (!found) throw ParseError("boxview: unknown view kind '" + head + "'");
    if (n.kind == NodeKind::LinearTerm) n.value = in.integer();
    while (in.peek() != ")") n.kids.push_back(parse_view(in, resolve));
    in.expect(")");
    validate(n);
    return n;
}

inline ViewNode parse_view(const std::string& text, const NameResolver& resolve) {
    SexpReader in(text);
    ViewNode n = parse_view(in, resolve);
    if (!in.at_end()) throw ParseError("boxview: trailing input after view");
    return n;
}

/// Value of the expression under a ground assignment.
inline Int evaluate(const ViewNode& n, const std::function<Int(VarId)>& value_of) {
    auto ev = [&](std::size_t i) { return evaluate(n.kids[i], value_of); };
    switch (n.kind) {
        case NodeKind::Var: return value_of(n.var);
        case NodeKind::Const: return n.value;
        case NodeKind::Add: return add_checked(ev(0), ev(1));
        case NodeKind::Sub: return sub_checked(ev(0), ev(1));
        case NodeKind::Neg: return neg_checked(ev(0));
        case NodeKind::Mul: return mul_checked(ev(0), ev(1));
        case NodeKind::Abs: {
            Int v = ev(0);
            return v < 0 ? neg_checked(v) : v;
        }
        case NodeKind::Sqr: {
            Int v = ev(0);
            return mul_checked(v, v);
        }
        case NodeKind::Min2: return std::min(ev(0), ev(1));
        case NodeKind::Max2: return std::max(ev(0), ev(1));
        case NodeKind::LinearTerm: return mul_checked(n.value, ev(0));
        case NodeKind::Sum: {
            Int s = 0;
            for (std::size_t i = 0; i < n.kids.size(); ++i) s = add_checked(s, ev(i));
            return s;
        }
        case NodeKind::ReifEq: return ev(0) == ev(1) ? 1 : 0;
        case NodeKind::ReifNeq: return ev(0) != ev(1) ? 1 : 0;
        case NodeKind::ReifLeq: return ev(0) <= ev(1) ? 1 : 0;
        case NodeKind::IfThenElse: return ev(0) >= 1 ? ev(1) : ev(2);
    }
    return 0;
}

inline bool contains_ite(const ViewNode& n) {
    if (n.kind == NodeKind::IfThenElse) return true;
    for (const auto& k : n.kids)
        if (contains_ite(k)) return true;
    return false;
}

inline void collect_vars(const ViewNode& n, std::vector<VarId>& out) {
    if (n.kind == NodeKind::Var) {
        if (std::find(out.begin(), out.end(), n.var) == out.end()) out.push_back(n.var);
        return;
    }
    for (const auto& k : n.kids) collect_vars(k, out);
}

inline void check_vars(const ViewNode& n, const Store& s) {
    if (n.kind == NodeKind::Var && (n.var.index < 0 || static_cast<std::size_t>(n.var.index) >= s.num_vars()))
        throw std::out_of_range("boxview: view refers to an unknown variable");
    for (const auto& k : n.kids) check_vars(k, s);
}

// ---------------------------------------------------------------------------
// Dynamic realization: every node is a separately dispatched object.

inline DynBox build_dynamic(const ViewNode& n, Store& s) {
    check_vars(n, s);
    auto kid = [&](std::size_t i) { return build_dynamic(n.kids[i], s); };
    bool mv = contains_ite(n);
    switch (n.kind) {
        case NodeKind::Var: return make_dyn(Var(s, n.var));
        case NodeKind::Const: return make_dyn(Const(s, n.value));
        case NodeKind::Add: return make_dyn(Add<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::Sub: return make_dyn(Sub<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::Neg: return make_dyn(Neg<DynBox>(kid(0)), mv);
        case NodeKind::Mul: return make_dyn(Mul<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::Abs: return make_dyn(Abs<DynBox>(kid(0)), mv);
        case NodeKind::Sqr: return make_dyn(Sqr<DynBox>(kid(0)), mv);
        case NodeKind::Min2: return make_dyn(Min2<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::Max2: return make_dyn(Max2<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::LinearTerm: return make_dyn(Lin<DynBox>(n.value, kid(0)), mv);
        case NodeKind::Sum: {
            std::vector<DynBox> xs;
            for (std::size_t i = 0; i < n.kids.size(); ++i) xs.push_back(kid(i));
            return make_dyn(SumN<DynBox>(std::move(xs)), mv);
        }
        case NodeKind::ReifEq: return make_dyn(ReifEq<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::ReifNeq: return make_dyn(ReifNeq<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::ReifLeq: return make_dyn(ReifLeq<DynBox, DynBox>(kid(0), kid(1)), mv);
        case NodeKind::IfThenElse: return make_dyn(IfThenElse<DynBox, DynBox, DynBox>(kid(0), kid(1), kid(2)), true);
    }
    throw std::logic_error("boxview: unhandled view kind");
}

// ---------------------------------------------------------------------------
// Static realization of an arbitrary tree: the same class templates,
// instantiated over a closed set of alternatives and selected with a
// variant switch instead of virtual calls.

namespace detail {
struct TreeNode;
}

class TreeView {
public:
    TreeView(Store& s, std::shared_ptr<const detail::TreeNode> n, bool moving)
        : s_(&s), n_(std::move(n)), moving_(moving) {}
    Int get_min() const;
    Int get_max() const;
    Interval bounds() const;
    bool upd_min(Int i) const;
    bool upd_max(Int i) const;
    void triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const;
    Store& store() const { return *s_; }
    bool has_moving_triggers() const { return moving_; }

private:
    Store* s_;
    std::shared_ptr<const detail::TreeNode> n_;
    bool moving_;
};

namespace detail {
using TreeAlt = std::variant<Var, Const, Add<TreeView, TreeView>, Sub<TreeView, TreeView>, Neg<TreeView>,
                             Mul<TreeView, TreeView>, Abs<TreeView>, Sqr<TreeView>, Min2<TreeView, TreeView>,
                             Max2<TreeView, TreeView>, Lin<TreeView>, SumN<TreeView>, ReifEq<TreeView, TreeView>,
                             ReifNeq<TreeView, TreeView>, ReifLeq<TreeView, TreeView>,
                             IfThenElse<TreeView, TreeView, TreeView>>;
struct TreeNode {
    TreeAlt v;
};
}  // namespace detail

inline Int TreeView::get_min() const {
    return std::visit([](const auto& v) { return v.get_min(); }, n_->v);
}
inline Int TreeView::get_max() const {
    return std::visit([](const auto& v) { return v.get_max(); }, n_->v);
}
inline Interval TreeView::bounds() const {
    return std::visit([](const auto& v) { return boxview::bounds(v); }, n_->v);
}
inline bool TreeView::upd_min(Int i) const {
    return std::visit([i](const auto& v) { return v.upd_min(i); }, n_->v);
}
inline bool TreeView::upd_max(Int i) const {
    return std::visit([i](const auto& v) { return v.upd_max(i); }, n_->v);
}
inline void TreeView::triggers(EventMask ev, std::vector<VarEvent>& out, bool full) const {
    std::visit([&](const auto& v) { v.triggers(ev, out, full); }, n_->v);
}

inline TreeView build_static(const ViewNode& n, Store& s) {
    check_vars(n, s);
    auto kid = [&](std::size_t i) { return build_static(n.kids[i], s); };
    auto wrap = [&](detail::TreeAlt alt) {
        return TreeView(s, std::make_shared<const detail::TreeNode>(detail::TreeNode{std::move(alt)}), contains_ite(n));
    };
    switch (n.kind) {
        case NodeKind::Var: return wrap(Var(s, n.var));
        case NodeKind::Const: return wrap(Const(s, n.value));
        case NodeKind::Add: return wrap(Add<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::Sub: return wrap(Sub<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::Neg: return wrap(Neg<TreeView>(kid(0)));
        case NodeKind::Mul: return wrap(Mul<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::Abs: return wrap(Abs<TreeView>(kid(0)));
        case NodeKind::Sqr: return wrap(Sqr<TreeView>(kid(0)));
        case NodeKind::Min2: return wrap(Min2<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::Max2: return wrap(Max2<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::LinearTerm: return wrap(Lin<TreeView>(n.value, kid(0)));
        case NodeKind::Sum: {
            std::vector<TreeView> xs;
            for (std::size_t i = 0; i < n.kids.size(); ++i) xs.push_back(kid(i));
            return wrap(SumN<TreeView>(std::move(xs)));
        }
        case NodeKind::ReifEq: return wrap(ReifEq<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::ReifNeq: return wrap(ReifNeq<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::ReifLeq: return wrap(ReifLeq<TreeView, TreeView>(kid(0), kid(1)));
        case NodeKind::IfThenElse: return wrap(IfThenElse<TreeView, TreeView, TreeView>(kid(0), kid(1), kid(2)));
    }
    throw std::logic_error("boxview: unhandled view kind");
}

enum class DispatchMode { Static, Dynamic };

/// True when the view's subscriptions can shrink as conditions become ground.
template <BoxView V>
bool moves_triggers(const V& v) {
    if constexpr (requires { v.has_moving_triggers(); })
        return v.has_moving_triggers();
    else
        return false;
}

}  // namespace boxview
