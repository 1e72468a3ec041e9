#pragma once

#include <algorithm>
#include <compare>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sofic/common.hpp"

namespace sofic {

enum class GroupKind { IntegerLine, IntegerLattice, FiniteCayley };

/// Element of Z, Z^d (coordinate vector) or a finite Cayley-table group
/// (single coordinate = element index). Arithmetic lives on GroupSpec.
struct GroupElement {
    std::vector<std::int64_t> coords;

    GroupElement() = default;
    explicit GroupElement(std::int64_t x) : coords{x} {}
    explicit GroupElement(std::vector<std::int64_t> v) : coords(std::move(v)) {}

    auto operator<=>(const GroupElement&) const = default;

    std::string to_string() const {
        if (coords.size() == 1) return std::to_string(coords[0]);
        std::string s = "(";
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(coords[i]);
        }
        return s + ")";
    }
};

inline GroupElement ge(std::int64_t x) { return GroupElement(x); }
inline GroupElement ge(std::initializer_list<std::int64_t> v) {
    return GroupElement(std::vector<std::int64_t>(v));
}

class GroupSpec;
using GroupPtr = std::shared_ptr<const GroupSpec>;

/// The acting group: Z, Z^d, or a finite group given by its multiplication
/// table. Immutable; share via GroupPtr.
class GroupSpec {
  public:
    static GroupPtr integer_line() {
        auto g = std::shared_ptr<GroupSpec>(new GroupSpec());
        g->kind_ = GroupKind::IntegerLine;
        g->dim_ = 1;
        g->generators_ = {ge(1), ge(-1)};
        return g;
    }

    static GroupPtr integer_lattice(int d) {
        if (d < 1) throw validation_error("lattice dimension must be >= 1");
        auto g = std::shared_ptr<GroupSpec>(new GroupSpec());
        g->kind_ = GroupKind::IntegerLattice;
        g->dim_ = d;
        for (int k = 0; k < d; ++k) {
            std::vector<std::int64_t> plus(d, 0), minus(d, 0);
            plus[k] = 1;
            minus[k] = -1;
            g->generators_.push_back(GroupElement(plus));
            g->generators_.push_back(GroupElement(minus));
        }
        return g;
    }

    /// table is row-major n*n with entries in [0,n); table[g*n+h] = g*h.
    static GroupPtr finite_cayley(std::vector<int> table, int identity,
                                  std::vector<GroupElement> generators = {}) {
        auto g = std::shared_ptr<GroupSpec>(new GroupSpec());
        g->kind_ = GroupKind::FiniteCayley;
        g->dim_ = 1;
        std::size_t n2 = table.size();
        std::size_t n = 0;
        while (n * n < n2) ++n;
        if (n == 0 || n * n != n2) throw validation_error("Cayley table must be square");
        g->order_ = static_cast<int>(n);
        g->identity_ = identity;
        g->table_ = std::move(table);
        if (identity < 0 || identity >= g->order_) throw validation_error("Cayley identity index out of range");
        g->validate_cayley();
        if (generators.empty()) {
            for (int i = 0; i < g->order_; ++i)
                if (i != identity) generators.push_back(ge(i));
        }
        for (const auto& s : generators) {
            g->check_element(s);
            GroupElement inv = g->inverse(s);
            if (std::find(generators.begin(), generators.end(), inv) == generators.end())
                throw validation_error("Cayley generator set not closed under inverse");
        }
        g->generators_ = std::move(generators);
        return g;
    }

    GroupKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int order() const { return order_; }
    int identity_index() const { return identity_; }
    const std::vector<int>& cayley_table() const { return table_; }
    const std::vector<GroupElement>& generators() const { return generators_; }

    bool same_as(const GroupSpec& o) const {
        return kind_ == o.kind_ && dim_ == o.dim_ && order_ == o.order_ &&
               identity_ == o.identity_ && table_ == o.table_;
    }

    GroupElement identity() const {
        switch (kind_) {
            case GroupKind::FiniteCayley:
                return ge(identity_);
            default:
                return GroupElement(std::vector<std::int64_t>(dim_, 0));
        }
    }

    void check_element(const GroupElement& g) const {
        if (static_cast<int>(g.coords.size()) != dim_)
            throw validation_error("group element has wrong arity");
        if (kind_ == GroupKind::FiniteCayley) {
            if (g.coords[0] < 0 || g.coords[0] >= order_)
                throw validation_error("Cayley element index out of range");
        }
    }

    GroupElement mul(const GroupElement& g, const GroupElement& h) const {
        check_element(g);
        check_element(h);
        if (kind_ == GroupKind::FiniteCayley) {
            int a = static_cast<int>(g.coords[0]), b = static_cast<int>(h.coords[0]);
            return ge(table_[static_cast<std::size_t>(a) * order_ + b]);
        }
        std::vector<std::int64_t> out(dim_);
        for (int k = 0; k < dim_; ++k) out[k] = checked_add(g.coords[k], h.coords[k]);
        return GroupElement(std::move(out));
    }

    GroupElement inverse(const GroupElement& g) const {
        check_element(g);
        if (kind_ == GroupKind::FiniteCayley) {
            int a = static_cast<int>(g.coords[0]);
            for (int b = 0; b < order_; ++b)
                if (table_[static_cast<std::size_t>(a) * order_ + b] == identity_) return ge(b);
            throw validation_error("Cayley table has no inverse (not a group)");
        }
        std::vector<std::int64_t> out(dim_);
        for (int k = 0; k < dim_; ++k) out[k] = checked_neg(g.coords[k]);
        return GroupElement(std::move(out));
    }

    bool is_identity(const GroupElement& g) const { return g == identity(); }

    std::string describe() const {
        switch (kind_) {
            case GroupKind::IntegerLine:
                return "Z";
            case GroupKind::IntegerLattice:
                return "Z^" + std::to_string(dim_);
            case GroupKind::FiniteCayley:
                return "cayley(n=" + std::to_string(order_) + ")";
        }
        return "?";
    }

  private:
    GroupSpec() = default;

    void validate_cayley() const {
        const int n = order_;
        // Latin square
        for (int r = 0; r < n; ++r) {
            std::vector<bool> seen_row(n, false), seen_col(n, false);
            for (int c = 0; c < n; ++c) {
                int rc = table_[static_cast<std::size_t>(r) * n + c];
                int cr = table_[static_cast<std::size_t>(c) * n + r];
                if (rc < 0 || rc >= n || cr < 0 || cr >= n)
                    throw validation_error("Cayley table entry out of range");
                if (seen_row[rc] || seen_col[cr])
                    throw validation_error("Cayley table is not a Latin square");
                seen_row[rc] = seen_col[cr] = true;
            }
        }
        // identity row/column act as identity
        for (int a = 0; a < n; ++a) {
            if (table_[static_cast<std::size_t>(identity_) * n + a] != a ||
                table_[static_cast<std::size_t>(a) * n + identity_] != a)
                throw validation_error("Cayley identity row/column does not act as identity");
        }
        // associativity (n is small in practice; this is O(n^3))
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    int ab = table_[static_cast<std::size_t>(a) * n + b];
                    int bc = table_[static_cast<std::size_t>(b) * n + c];
                    if (table_[static_cast<std::size_t>(ab) * n + c] !=
                        table_[static_cast<std::size_t>(a) * n + bc])
                        throw validation_error("Cayley table is not associative");
                }
    }

    GroupKind kind_ = GroupKind::IntegerLine;
    int dim_ = 1;
    int order_ = 0;
    int identity_ = 0;
    std::vector<int> table_;
    std::vector<GroupElement> generators_;
};

inline void require_same_group(const GroupSpec& a, const GroupSpec& b) {
    if (!a.same_as(b)) throw validation_error("mismatched group specs");
}

/// Finite window W ⊂ G in canonical (sorted, duplicate-free) order, so that
/// A^W pattern indexing is deterministic no matter how it was assembled.
class Window {
  public:
    Window(GroupPtr group, std::vector<GroupElement> elements)
        : group_(std::move(group)), elements_(std::move(elements)) {
        if (!group_) throw validation_error("window requires a group");
        if (elements_.empty()) throw validation_error("window must be nonempty");
        for (const auto& e : elements_) group_->check_element(e);
        std::sort(elements_.begin(), elements_.end());
        elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
    }

    const GroupPtr& group() const { return group_; }
    const std::vector<GroupElement>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }

    bool operator==(const Window& o) const {
        return group_->same_as(*o.group_) && elements_ == o.elements_;
    }

    bool contains(const Window& sub) const {
        return std::includes(elements_.begin(), elements_.end(), sub.elements_.begin(),
                             sub.elements_.end());
    }

    std::string describe() const {
        std::string s = "{";
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            if (i) s += " ";
            s += elements_[i].to_string();
        }
        return s + "}";
    }

  private:
    GroupPtr group_;
    std::vector<GroupElement> elements_;
};

/// Window {a, a+1, ..., b} over Z.
inline Window window_z_range(const GroupPtr& z, std::int64_t a, std::int64_t b) {
    if (a > b) throw validation_error("bad window range");
    std::vector<GroupElement> el;
    for (std::int64_t x = a; x <= b; ++x) el.push_back(ge(x));
    return Window(z, std::move(el));
}

/// Folner set: boxes {1..n}^d for Z^d, the whole group for finite groups.
struct FolnerSet {
    GroupPtr group;
    std::vector<GroupElement> elements;  // sorted, duplicate-free

    std::size_t size() const { return elements.size(); }
};

inline FolnerSet folner_box(const GroupPtr& group, std::int64_t n) {
    if (!group) throw validation_error("folner_box requires a group");
    if (group->kind() == GroupKind::FiniteCayley) {
        FolnerSet f{group, {}};
        for (int i = 0; i < group->order(); ++i) f.elements.push_back(ge(i));
        return f;
    }
    if (n <= 0) throw validation_error("folner_box requires n >= 1");
    const int d = group->dim();
    std::vector<GroupElement> out;
    std::vector<std::int64_t> cur(d, 1);
    for (;;) {
        out.emplace_back(cur);
        int k = d - 1;
        while (k >= 0 && cur[k] == n) {
            cur[k] = 1;
            --k;
        }
        if (k < 0) break;
        ++cur[k];
    }
    std::sort(out.begin(), out.end());
    return FolnerSet{group, std::move(out)};
}

struct InvarianceRatios {
    Rational intersection_ratio;  // |KF ∩ F| / |F|
    Rational symdiff_ratio;       // |KF Δ F| / |F|
};

/// Exact left-invariance ratios of F against translation set K (KF = {kf}).
inline InvarianceRatios invariance_ratios(const FolnerSet& F,
                                          const std::vector<GroupElement>& K) {
    if (F.elements.empty()) throw validation_error("invariance_ratios: empty Folner set");
    const GroupSpec& g = *F.group;
    std::set<GroupElement> kf;
    for (const auto& k : K)
        for (const auto& f : F.elements) kf.insert(g.mul(k, f));
    std::set<GroupElement> fset(F.elements.begin(), F.elements.end());
    std::size_t inter = 0;
    for (const auto& e : kf)
        if (fset.count(e)) ++inter;
    const std::size_t symdiff = (kf.size() - inter) + (fset.size() - inter);
    const auto fs = static_cast<std::int64_t>(fset.size());
    return {Rational(static_cast<std::int64_t>(inter), fs),
            Rational(static_cast<std::int64_t>(symdiff), fs)};
}

}  // namespace sofic
