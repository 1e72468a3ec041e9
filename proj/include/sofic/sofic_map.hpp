#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/permutation.hpp"

namespace sofic {

enum class EvalMode { Homomorphic, WordProduct, Explicit };

/// A finite permutation model sigma: G -> Sym(m). Not assumed to be a
/// homomorphism; defect_stats quantifies how far it is from one.
///
/// Evaluation modes:
///  - Homomorphic: sigma(g) computed by exact group arithmetic. The point set
///    splits into `block_count` equal blocks, each a torus of shape `dims`
///    (Z: dims={modulus}; Z^d: torus dims; FiniteCayley: the regular action).
///  - WordProduct: sigma(g) is the product of stored generator permutations
///    along the canonical word for g (Z: |g| copies of sign(g); Z^d: generator
///    letters in dimension order).
///  - Explicit: a user-supplied table of permutations on a finite element set.
class SoficMap {
  public:
    static SoficMap cyclic_approximation(std::size_t m) {
        if (m < 1) throw validation_error("cyclic approximation requires m >= 1");
        SoficMap s;
        s.group_ = GroupSpec::integer_line();
        s.m_ = m;
        s.mode_ = EvalMode::Homomorphic;
        s.dims_ = {static_cast<std::int64_t>(m)};
        s.block_count_ = 1;
        s.label_ = "cyclic(" + std::to_string(m) + ")";
        s.store_generator_perms();
        return s;
    }

    static SoficMap torus_approximation(const std::vector<std::int64_t>& dims) {
        if (dims.empty()) throw validation_error("torus approximation requires dims");
        std::size_t m = 1;
        for (auto d : dims) {
            if (d < 1) throw validation_error("torus dims must be >= 1");
            if (m > (std::size_t(1) << 40) / static_cast<std::size_t>(d))
                throw guard_error("torus too large");
            m *= static_cast<std::size_t>(d);
        }
        SoficMap s;
        s.group_ = dims.size() == 1 ? GroupSpec::integer_line()
                                    : GroupSpec::integer_lattice(static_cast<int>(dims.size()));
        s.m_ = m;
        s.mode_ = EvalMode::Homomorphic;
        s.dims_ = dims;
        s.block_count_ = 1;
        s.label_ = "torus(";
        for (std::size_t i = 0; i < dims.size(); ++i)
            s.label_ += (i ? "x" : "") + std::to_string(dims[i]);
        s.label_ += ")";
        s.store_generator_perms();
        return s;
    }

    /// Left regular action of a finite Cayley group on itself; a genuine
    /// homomorphism, m = |G|.
    static SoficMap cayley_regular_action(GroupPtr group) {
        if (!group || group->kind() != GroupKind::FiniteCayley)
            throw validation_error("regular action requires a finite Cayley group");
        SoficMap s;
        s.group_ = std::move(group);
        s.m_ = static_cast<std::size_t>(s.group_->order());
        s.mode_ = EvalMode::Homomorphic;
        s.block_count_ = 1;
        s.label_ = "regular(" + std::to_string(s.m_) + ")";
        s.store_generator_perms();
        return s;
    }

    /// Partial action of Z or Z^d on a Folner box: sigma(s)f = sf where
    /// sf stays in the box; the leftover points are completed to a bijection
    /// by matching unmatched sources to unmatched targets in ascending order.
    static SoficMap folner_partial_action(const GroupPtr& group, const FolnerSet& F) {
        if (!group) throw validation_error("folner_partial_action requires a group");
        if (group->kind() == GroupKind::FiniteCayley)
            throw validation_error("folner_partial_action requires Z or Z^d");
        require_same_group(*group, *F.group);
        SoficMap s;
        s.group_ = group;
        s.m_ = F.size();
        s.mode_ = EvalMode::WordProduct;
        s.label_ = "folner_box(" + std::to_string(F.size()) + ")";
        std::map<GroupElement, std::uint32_t> index;
        for (std::size_t i = 0; i < F.elements.size(); ++i)
            index[F.elements[i]] = static_cast<std::uint32_t>(i);
        for (const auto& gen : group->generators()) {
            std::vector<std::uint32_t> img(s.m_, UINT32_MAX);
            std::vector<bool> hit(s.m_, false);
            for (std::size_t i = 0; i < s.m_; ++i) {
                GroupElement sf = group->mul(gen, F.elements[i]);
                auto it = index.find(sf);
                if (it != index.end()) {
                    img[i] = it->second;
                    hit[it->second] = true;
                }
            }
            std::vector<std::uint32_t> free_targets;
            for (std::size_t t = 0; t < s.m_; ++t)
                if (!hit[t]) free_targets.push_back(static_cast<std::uint32_t>(t));
            std::size_t next = 0;
            for (std::size_t i = 0; i < s.m_; ++i)
                if (img[i] == UINT32_MAX) img[i] = free_targets[next++];
            s.gen_perms_.emplace_back(gen, Permutation::from_images(std::move(img)));
        }
        return s;
    }

    /// User-supplied table sigma(g) for a finite element set.
    static SoficMap explicit_map(GroupPtr group, std::size_t m,
                                 std::vector<std::pair<GroupElement, Permutation>> table,
                                 std::string label = "") {
        if (!group) throw validation_error("explicit map requires a group");
        SoficMap s;
        s.group_ = std::move(group);
        s.m_ = m;
        s.mode_ = EvalMode::Explicit;
        s.label_ = label.empty() ? ("explicit(m=" + std::to_string(m) + ")") : std::move(label);
        for (auto& [el, perm] : table) {
            s.group_->check_element(el);
            if (perm.size() != m) throw validation_error("explicit permutation has wrong size");
            s.gen_perms_.emplace_back(el, std::move(perm));
        }
        return s;
    }

    /// WordProduct map from per-generator permutations.
    static SoficMap from_generator_perms(GroupPtr group, std::size_t m,
                                         std::vector<std::pair<GroupElement, Permutation>> perms,
                                         std::string label = "") {
        if (!group) throw validation_error("sofic map requires a group");
        if (group->kind() == GroupKind::FiniteCayley)
            throw validation_error("WordProduct mode requires Z or Z^d");
        SoficMap s;
        s.group_ = std::move(group);
        s.m_ = m;
        s.mode_ = EvalMode::WordProduct;
        s.label_ = label.empty() ? ("word_product(m=" + std::to_string(m) + ")") : std::move(label);
        for (auto& [el, perm] : perms) {
            s.group_->check_element(el);
            if (perm.size() != m) throw validation_error("generator permutation has wrong size");
            s.gen_perms_.emplace_back(el, std::move(perm));
        }
        for (const auto& gen : s.group_->generators())
            if (!s.find_perm(gen)) throw validation_error("missing permutation for generator " + gen.to_string());
        return s;
    }

    std::size_t size() const { return m_; }
    const GroupPtr& group() const { return group_; }
    EvalMode mode() const { return mode_; }
    const std::string& label() const { return label_; }
    const std::vector<std::int64_t>& homomorphic_dims() const { return dims_; }
    std::size_t homomorphic_blocks() const { return block_count_; }
    const std::vector<std::pair<GroupElement, Permutation>>& generator_perms() const {
        return gen_perms_;
    }

    /// True when this map is the plain m-cycle model of Z (possibly checked by
    /// the exact-count shortcut).
    bool is_single_cyclic_z() const {
        return mode_ == EvalMode::Homomorphic && group_->kind() == GroupKind::IntegerLine &&
               block_count_ == 1;
    }

    Permutation eval(const GroupElement& g) const {
        group_->check_element(g);
        switch (mode_) {
            case EvalMode::Homomorphic:
                return eval_homomorphic(g);
            case EvalMode::WordProduct:
                return eval_word_product(g);
            case EvalMode::Explicit: {
                if (const Permutation* p = find_perm(g)) return *p;
                throw validation_error("explicit sofic map has no entry for " + g.to_string());
            }
        }
        throw validation_error("bad eval mode");
    }

  private:
    SoficMap() = default;

    const Permutation* find_perm(const GroupElement& g) const {
        for (const auto& [el, perm] : gen_perms_)
            if (el == g) return &perm;
        return nullptr;
    }

    void store_generator_perms() {
        gen_perms_.clear();
        for (const auto& gen : group_->generators())
            gen_perms_.emplace_back(gen, eval_homomorphic(gen));
    }

    Permutation eval_homomorphic(const GroupElement& g) const {
        std::vector<std::uint32_t> img(m_);
        if (group_->kind() == GroupKind::FiniteCayley) {
            const int n = group_->order();
            const auto& table = group_->cayley_table();
            const std::size_t a = static_cast<std::size_t>(g.coords[0]);
            const std::size_t block = static_cast<std::size_t>(n);
            for (std::size_t b = 0; b * block < m_; ++b)
                for (int p = 0; p < n; ++p)
                    img[b * block + static_cast<std::size_t>(p)] =
                        static_cast<std::uint32_t>(b * block + static_cast<std::size_t>(table[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(p)]));
            return Permutation::from_images(std::move(img));
        }
        std::size_t block = 1;
        for (auto d : dims_) block *= static_cast<std::size_t>(d);
        const int d = static_cast<int>(dims_.size());
        std::vector<std::int64_t> shift(d);
        for (int k = 0; k < d; ++k) shift[k] = mod_positive(g.coords[k], dims_[k]);
        for (std::size_t b = 0; b * block < m_; ++b) {
            for (std::size_t p = 0; p < block; ++p) {
                // row-major multi-index over dims
                std::size_t rest = p, q = 0;
                for (int k = 0; k < d; ++k) {
                    std::size_t stride = 1;
                    for (int j = k + 1; j < d; ++j) stride *= static_cast<std::size_t>(dims_[j]);
                    std::int64_t xk = static_cast<std::int64_t>(rest / stride);
                    rest %= stride;
                    std::int64_t yk = (xk + shift[k]) % dims_[k];
                    q += static_cast<std::size_t>(yk) * stride;
                }
                img[b * block + p] = static_cast<std::uint32_t>(b * block + q);
            }
        }
        return Permutation::from_images(std::move(img));
    }

    Permutation eval_word_product(const GroupElement& g) const {
        // canonical word: dimension-major generator letters, |g_k| copies each
        Permutation acc = Permutation::identity(m_);
        const int d = group_->dim();
        for (int k = 0; k < d; ++k) {
            std::int64_t a = g.coords[k];
            if (a == 0) continue;
            std::vector<std::int64_t> unit(d, 0);
            unit[k] = a > 0 ? 1 : -1;
            const Permutation* letter = find_perm(GroupElement(unit));
            if (!letter) throw validation_error("missing generator permutation for canonical word");
            acc = acc.compose(letter->power(a > 0 ? a : -a));
        }
        return acc;
    }

    GroupPtr group_;
    std::size_t m_ = 0;
    EvalMode mode_ = EvalMode::WordProduct;
    std::vector<std::pair<GroupElement, Permutation>> gen_perms_;
    std::vector<std::int64_t> dims_;  // Homomorphic Z/Z^d block shape
    std::size_t block_count_ = 1;
    std::string label_;

    friend SoficMap block_sum(const std::vector<SoficMap>& parts,
                              const std::vector<std::int64_t>& multiplicities);
};

/// sigma_1 + ... + sigma_n on m_1 + ... + m_n points: point p is routed to its
/// block's permutation (blocks ordered part-by-part, each repeated by its
/// multiplicity). The result stays Homomorphic when every part is the same
/// homomorphic block shape; otherwise it evaluates by canonical words.
inline SoficMap block_sum(const std::vector<SoficMap>& parts,
                          const std::vector<std::int64_t>& multiplicities) {
    if (parts.empty()) throw validation_error("block_sum requires at least one part");
    if (parts.size() != multiplicities.size())
        throw validation_error("block_sum: parts and multiplicities differ in length");
    const GroupPtr& group = parts[0].group();
    std::size_t m = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require_same_group(*group, *parts[i].group());
        if (multiplicities[i] < 1) throw validation_error("block_sum multiplicities must be >= 1");
        m += static_cast<std::size_t>(multiplicities[i]) * parts[i].size();
    }

    bool all_same_homomorphic = true;
    for (const auto& p : parts) {
        if (p.mode() != EvalMode::Homomorphic || p.homomorphic_blocks() < 1 ||
            p.homomorphic_dims() != parts[0].homomorphic_dims() ||
            p.group()->kind() == GroupKind::FiniteCayley ||
            p.group()->kind() != GroupKind::IntegerLine) {
            all_same_homomorphic = false;
            break;
        }
    }

    SoficMap s;
    s.group_ = group;
    s.m_ = m;
    s.label_ = "block_sum";
    if (all_same_homomorphic) {
        s.mode_ = EvalMode::Homomorphic;
        s.dims_ = parts[0].homomorphic_dims();
        std::size_t block = static_cast<std::size_t>(s.dims_[0]);
        s.block_count_ = m / block;
        s.store_generator_perms();
        return s;
    }

    if (group->kind() == GroupKind::FiniteCayley) {
        // finite group: materialize the whole table block-diagonally
        s.mode_ = EvalMode::Explicit;
        for (int a = 0; a < group->order(); ++a) {
            GroupElement el = ge(a);
            std::vector<std::uint32_t> img(m);
            std::size_t base = 0;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                Permutation pp = parts[i].eval(el);
                for (std::int64_t c = 0; c < multiplicities[i]; ++c) {
                    for (std::size_t p = 0; p < parts[i].size(); ++p)
                        img[base + p] = static_cast<std::uint32_t>(base + pp(p));
                    base += parts[i].size();
                }
            }
            s.gen_perms_.emplace_back(el, Permutation::from_images(std::move(img)));
        }
        return s;
    }

    s.mode_ = EvalMode::WordProduct;
    for (const auto& gen : group->generators()) {
        std::vector<std::uint32_t> img(m);
        std::size_t base = 0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            Permutation pp = parts[i].eval(gen);
            for (std::int64_t c = 0; c < multiplicities[i]; ++c) {
                for (std::size_t p = 0; p < parts[i].size(); ++p)
                    img[base + p] = static_cast<std::uint32_t>(base + pp(p));
                base += parts[i].size();
            }
        }
        s.gen_perms_.emplace_back(gen, Permutation::from_images(std::move(img)));
    }
    return s;
}

/// Finitely supported distribution over SoficMaps of common size (Def. of a
/// random sofic approximation, restricted to finite support).
class RandomSoficApprox {
  public:
    RandomSoficApprox(std::vector<std::pair<SoficMap, Rational>> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw validation_error("random sofic approximation needs atoms");
        Rational total = 0;
        for (const auto& [sm, w] : atoms_) {
            if (w <= 0) throw validation_error("atom weights must be positive");
            require_same_group(*atoms_[0].first.group(), *sm.group());
            if (sm.size() != atoms_[0].first.size())
                throw validation_error("atoms must share a common m");
            total += w;
        }
        Rational err = total - 1;
        if (err < 0) err = -err;
        if (err > tolerance_1e12())
            throw validation_error("atom weights must sum to 1 (within 1e-12)");
    }

    const std::vector<std::pair<SoficMap, Rational>>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_[0].first.size(); }

  private:
    std::vector<std::pair<SoficMap, Rational>> atoms_;
};

/// Per-pair defect fractions, aligned with the query lists.
struct DefectReport {
    std::vector<Rational> mult_defect;  // fraction of p with sigma(g)sigma(h)p != sigma(gh)p
    std::vector<Rational> free_defect;  // fraction of p with sigma(g)p == sigma(h)p
};

inline DefectReport defect_stats(const SoficMap& sigma,
                                 const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                                 const std::vector<std::pair<GroupElement, GroupElement>>& distinct) {
    DefectReport rep;
    const std::int64_t m = static_cast<std::int64_t>(sigma.size());
    for (const auto& [g, h] : pairs) {
        Permutation sg = sigma.eval(g);
        Permutation sh = sigma.eval(h);
        Permutation sgh = sigma.eval(sigma.group()->mul(g, h));
        std::int64_t bad = 0;
        for (std::size_t p = 0; p < sigma.size(); ++p)
            if (sg(sh(p)) != sgh(p)) ++bad;
        rep.mult_defect.emplace_back(bad, m);
    }
    for (const auto& [g, h] : distinct) {
        if (g == h) throw validation_error("distinct-pair list contains g == h");
        Permutation sg = sigma.eval(g);
        Permutation sh = sigma.eval(h);
        std::int64_t coincide = 0;
        for (std::size_t p = 0; p < sigma.size(); ++p)
            if (sg(p) == sh(p)) ++coincide;
        rep.free_defect.emplace_back(coincide, m);
    }
    return rep;
}

/// Exact expectation of defect_stats over the finite support of kappa.
inline DefectReport random_defect_stats(
    const RandomSoficApprox& kappa,
    const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
    const std::vector<std::pair<GroupElement, GroupElement>>& distinct) {
    DefectReport avg;
    avg.mult_defect.assign(pairs.size(), Rational(0));
    avg.free_defect.assign(distinct.size(), Rational(0));
    for (const auto& [sm, w] : kappa.atoms()) {
        DefectReport r = defect_stats(sm, pairs, distinct);
        for (std::size_t i = 0; i < pairs.size(); ++i) avg.mult_defect[i] += w * r.mult_defect[i];
        for (std::size_t i = 0; i < distinct.size(); ++i) avg.free_defect[i] += w * r.free_defect[i];
    }
    return avg;
}

/// Witness for (W,eps)-closeness of two sofic maps: subsets Q ⊂ [m],
/// Q' ⊂ [m'] and a bijection beta: Q -> Q' given pointwise.
struct ClosenessWitness {
    std::vector<std::uint32_t> q;        // elements of Q (0-based points of sigma)
    std::vector<std::uint32_t> q_image;  // beta(q[i]); Q' is exactly this set

    void validate(std::size_t m, std::size_t m_prime) const {
        if (q.size() != q_image.size()) throw validation_error("witness: beta not defined on all of Q");
        std::set<std::uint32_t> qs(q.begin(), q.end()), is(q_image.begin(), q_image.end());
        if (qs.size() != q.size() || is.size() != q_image.size())
            throw validation_error("witness: beta is not a bijection");
        for (auto p : q)
            if (p >= m) throw validation_error("witness: Q not contained in [m]");
        for (auto p : q_image)
            if (p >= m_prime) throw validation_error("witness: Q' not contained in [m']");
    }
};

struct ClosenessCheck {
    bool ok = false;
    bool cond1_ok = false;  // sigma'(w) beta(q) = beta(sigma(w) q) whenever sigma(w)q in Q
    bool cond2_ok = false;  // the mirror condition through beta^{-1}
    bool cond3_ok = false;  // |Q| >= (1-eps) m and |Q'| >= (1-eps) m'
    std::string detail;
};

/// Checks the three conditions of (W,eps)-closeness for a supplied witness.
inline ClosenessCheck verify_closeness_witness(const SoficMap& sigma, const SoficMap& sigma_prime,
                                               const Window& W, const Rational& eps,
                                               const ClosenessWitness& w) {
    require_same_group(*sigma.group(), *sigma_prime.group());
    require_same_group(*sigma.group(), *W.group());
    const std::size_t m = sigma.size(), mp = sigma_prime.size();
    w.validate(m, mp);

    std::vector<std::int64_t> beta(m, -1), beta_inv(mp, -1);
    for (std::size_t i = 0; i < w.q.size(); ++i) {
        beta[w.q[i]] = w.q_image[i];
        beta_inv[w.q_image[i]] = w.q[i];
    }

    ClosenessCheck out;
    out.cond1_ok = out.cond2_ok = true;
    for (const auto& el : W.elements()) {
        Permutation sw = sigma.eval(el);
        Permutation spw = sigma_prime.eval(el);
        for (auto qpt : w.q) {
            std::uint32_t moved = sw(qpt);
            if (beta[moved] >= 0) {  // sigma(w)q in Q
                if (spw(static_cast<std::size_t>(beta[qpt])) != static_cast<std::uint32_t>(beta[moved])) {
                    out.cond1_ok = false;
                    if (out.detail.empty())
                        out.detail = "condition 1 fails at w=" + el.to_string() +
                                     " q=" + std::to_string(qpt + 1);
                }
            }
        }
        for (auto qp : w.q_image) {
            std::uint32_t moved = spw(qp);
            if (beta_inv[moved] >= 0) {  // sigma'(w)q' in Q'
                if (sw(static_cast<std::size_t>(beta_inv[qp])) != static_cast<std::uint32_t>(beta_inv[moved])) {
                    out.cond2_ok = false;
                    if (out.detail.empty())
                        out.detail = "condition 2 fails at w=" + el.to_string() +
                                     " q'=" + std::to_string(qp + 1);
                }
            }
        }
    }
    // |Q| >= (1-eps) m  <=>  |Q| + eps*m >= m, kept rational-exact
    const Rational qn(static_cast<std::int64_t>(w.q.size()));
    out.cond3_ok = qn >= (Rational(1) - eps) * Rational(static_cast<std::int64_t>(m)) &&
                   qn >= (Rational(1) - eps) * Rational(static_cast<std::int64_t>(mp));
    if (!out.cond3_ok && out.detail.empty()) out.detail = "condition 3 fails (|Q| too small)";
    out.ok = out.cond1_ok && out.cond2_ok && out.cond3_ok;
    return out;
}

/// Brute-force witness search, intended as a test oracle for small maps
/// (guarded by m*m' <= 10^4). Grows a partial bijection from every seed pair
/// by propagating beta(sigma(w)q) := sigma'(w)beta(q), trims violations, and
/// keeps the first witness that verifies at the given eps.
inline std::optional<ClosenessWitness> search_closeness_witness(const SoficMap& sigma,
                                                                const SoficMap& sigma_prime,
                                                                const Window& W,
                                                                const Rational& eps) {
    const std::size_t m = sigma.size(), mp = sigma_prime.size();
    if (m * mp > 10000) throw guard_error("witness search limited to m*m' <= 10^4");

    std::vector<Permutation> sw, spw;
    for (const auto& el : W.elements()) {
        sw.push_back(sigma.eval(el));
        spw.push_back(sigma_prime.eval(el));
    }

    for (std::size_t seed_q = 0; seed_q < m; ++seed_q) {
        for (std::size_t seed_qp = 0; seed_qp < mp; ++seed_qp) {
            std::vector<std::int64_t> beta(m, -1), beta_inv(mp, -1);
            beta[seed_q] = static_cast<std::int64_t>(seed_qp);
            beta_inv[seed_qp] = static_cast<std::int64_t>(seed_q);
            std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(seed_q)};
            while (!frontier.empty()) {
                std::uint32_t qpt = frontier.back();
                frontier.pop_back();
                for (std::size_t wi = 0; wi < sw.size(); ++wi) {
                    std::uint32_t a = sw[wi](qpt);
                    std::uint32_t b = spw[wi](static_cast<std::size_t>(beta[qpt]));
                    if (beta[a] < 0 && beta_inv[b] < 0) {
                        beta[a] = b;
                        beta_inv[b] = a;
                        frontier.push_back(a);
                    }
                }
            }
            // trim points violating conditions 1/2 until stable
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t p = 0; p < m; ++p) {
                    if (beta[p] < 0) continue;
                    for (std::size_t wi = 0; wi < sw.size() && beta[p] >= 0; ++wi) {
                        std::uint32_t a = sw[wi](p);
                        if (beta[a] >= 0 &&
                            spw[wi](static_cast<std::size_t>(beta[p])) != static_cast<std::uint32_t>(beta[a])) {
                            beta_inv[beta[p]] = -1;
                            beta[p] = -1;
                            changed = true;
                        }
                    }
                }
                for (std::size_t p2 = 0; p2 < mp; ++p2) {
                    if (beta_inv[p2] < 0) continue;
                    for (std::size_t wi = 0; wi < sw.size() && beta_inv[p2] >= 0; ++wi) {
                        std::uint32_t a = spw[wi](p2);
                        if (beta_inv[a] >= 0 &&
                            sw[wi](static_cast<std::size_t>(beta_inv[p2])) != static_cast<std::uint32_t>(beta_inv[a])) {
                            beta[beta_inv[p2]] = -1;
                            beta_inv[p2] = -1;
                            changed = true;
                        }
                    }
                }
            }
            ClosenessWitness cand;
            for (std::size_t p = 0; p < m; ++p)
                if (beta[p] >= 0) {
                    cand.q.push_back(static_cast<std::uint32_t>(p));
                    cand.q_image.push_back(static_cast<std::uint32_t>(beta[p]));
                }
            if (cand.q.empty()) continue;
            if (verify_closeness_witness(sigma, sigma_prime, W, eps, cand).ok) return cand;
        }
    }
    return std::nullopt;
}

struct RApproximationResult {
    bool ok = false;          // |V| >= (1 - 1/r) m
    Rational v_fraction = 0;  // |V| / m
};

/// Checks whether sigma is an r-approximation to (G,S): the set V of points on
/// which all length-r words over S ∪ {e} multiply correctly and distinct
/// products stay disjoint must have |V| >= (1-1/r)m.
inline RApproximationResult r_approximation_check(const SoficMap& sigma,
                                                  const std::vector<GroupElement>& S, int r) {
    if (r < 1) throw validation_error("r must be >= 1");
    const GroupSpec& g = *sigma.group();
    std::vector<GroupElement> letters;
    letters.push_back(g.identity());
    for (const auto& s : S) {
        g.check_element(s);
        if (std::find(S.begin(), S.end(), g.inverse(s)) == S.end())
            throw validation_error("r_approximation_check requires S = S^{-1}");
        if (std::find(letters.begin(), letters.end(), s) == letters.end()) letters.push_back(s);
    }

    double words_est = 1;
    for (int i = 0; i < r; ++i) words_est *= static_cast<double>(letters.size());
    if (words_est > 1e6) throw guard_error("|S ∪ {e}|^r exceeds 10^6; reduce r");

    const std::size_t m = sigma.size();
    std::vector<Permutation> letter_perm;
    for (const auto& el : letters) letter_perm.push_back(sigma.eval(el));

    std::map<GroupElement, std::size_t> product_index;
    std::vector<Permutation> product_perm;
    std::vector<bool> bad(m, false);

    // walk the word tree right-to-left: node = sigma(g_k)...sigma(g_r) composite
    struct Frame {
        Permutation perm;
        GroupElement prod;
        int depth;
    };
    std::vector<Frame> stack;
    stack.push_back({Permutation::identity(m), g.identity(), 0});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (f.depth == r) {
            auto [it, fresh] = product_index.try_emplace(f.prod, product_perm.size());
            if (fresh) product_perm.push_back(sigma.eval(f.prod));
            const Permutation& direct = product_perm[it->second];
            for (std::size_t p = 0; p < m; ++p)
                if (f.perm(p) != direct(p)) bad[p] = true;
            continue;
        }
        for (std::size_t li = 0; li < letters.size(); ++li) {
            // prepend letter: word g_1...g_r applies rightmost first
            stack.push_back({letter_perm[li].compose(f.perm), g.mul(letters[li], f.prod), f.depth + 1});
        }
    }

    // freeness: across distinct products, images of v must be pairwise distinct
    std::vector<std::uint32_t> stamp(m, UINT32_MAX);
    for (std::size_t p = 0; p < m; ++p) {
        if (bad[p]) continue;
        bool clash = false;
        for (std::size_t pi = 0; pi < product_perm.size() && !clash; ++pi) {
            std::uint32_t v = product_perm[pi](p);
            if (stamp[v] == static_cast<std::uint32_t>(p))
                clash = true;
            else
                stamp[v] = static_cast<std::uint32_t>(p);
        }
        if (clash) bad[p] = true;
    }

    std::int64_t good = 0;
    for (std::size_t p = 0; p < m; ++p)
        if (!bad[p]) ++good;
    RApproximationResult res;
    res.v_fraction = Rational(good, static_cast<std::int64_t>(m));
    // |V| >= (1 - 1/r) m  <=>  r |V| >= (r-1) m, exact in integers
    res.ok = good * static_cast<std::int64_t>(r) >=
             static_cast<std::int64_t>(r - 1) * static_cast<std::int64_t>(m);
    return res;
}

}  // namespace sofic
