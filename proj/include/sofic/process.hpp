#pragma once

#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/pattern_dist.hpp"
#include "sofic/rng.hpp"

namespace sofic {

/// Draws from a rational categorical distribution using a 53-bit uniform.
inline std::size_t sample_categorical(const std::vector<Rational>& probs, Rng& rng) {
    Rational u = rng.unit_rational();
    Rational acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

/// A shift-invariant symbolic source over G with finite alphabet. Immutable;
/// Factor/Product wrap shared inner processes. Window statistics are exact
/// rationals wherever the structure permits (which is everywhere here).
class Process {
  public:
    static Process bernoulli(GroupPtr group, Alphabet alphabet, std::vector<Rational> omega) {
        if (!group) throw validation_error("process requires a group");
        if (omega.size() != alphabet.size())
            throw validation_error("Bernoulli base must match the alphabet");
        validate_dist(omega, "Bernoulli base");
        Process p(std::move(group), std::move(alphabet));
        p.impl_->data = BernoulliData{std::move(omega)};
        return p;
    }

    /// Stationary Markov chain over Z. pi is validated against P (within
    /// 1e-10), not computed.
    static Process markov_z(Alphabet alphabet, std::vector<std::vector<Rational>> P,
                            std::vector<Rational> pi) {
        const std::size_t k = alphabet.size();
        if (P.size() != k || pi.size() != k)
            throw validation_error("Markov matrix/vector must match the alphabet");
        for (const auto& row : P) {
            if (row.size() != k) throw validation_error("Markov matrix must be square");
            validate_dist(row, "Markov row");
        }
        validate_dist(pi, "Markov stationary vector");
        static const Rational tol(1, BigInt("10000000000"));  // 1e-10
        for (std::size_t j = 0; j < k; ++j) {
            Rational s = 0;
            for (std::size_t i = 0; i < k; ++i) s += pi[i] * P[i][j];
            Rational err = s - pi[j];
            if (err < 0) err = -err;
            if (err > tol) throw validation_error("pi is not stationary for P (within 1e-10)");
        }
        Process p(GroupSpec::integer_line(), std::move(alphabet));
        p.impl_->data = MarkovData{std::move(P), std::move(pi)};
        return p;
    }

    /// Symbol factor beta ∘ X. beta maps every inner symbol index to an outer
    /// symbol index (total by construction of the vector).
    static Process factor(Process inner, std::vector<std::size_t> beta, Alphabet outer) {
        if (beta.size() != inner.alphabet().size())
            throw validation_error("factor map must be total on the inner alphabet");
        for (auto b : beta)
            if (b >= outer.size()) throw validation_error("factor map hits unknown symbol");
        Process p(inner.group(), std::move(outer));
        p.impl_->data = FactorData{std::make_shared<Process>(std::move(inner)), std::move(beta)};
        return p;
    }

    static Process direct_product(Process left, Process right) {
        require_same_group(*left.group(), *right.group());
        Alphabet pair = Alphabet::pair(left.alphabet(), right.alphabet());
        Process p(left.group(), std::move(pair));
        p.impl_->data = ProductData{std::make_shared<Process>(std::move(left)),
                                    std::make_shared<Process>(std::move(right))};
        return p;
    }

    /// Shift-averaged i.i.d. concatenation of nu-blocks over Z: blocks of
    /// length m_block tile the line, the phase is averaged uniformly.
    static Process block_iid(Alphabet alphabet, std::size_t m_block, std::vector<Rational> nu) {
        if (m_block < 1) throw validation_error("block length must be >= 1");
        const std::size_t cells = checked_pattern_space(alphabet.size(), m_block, 1u << 22);
        if (nu.size() != cells) throw validation_error("block measure has wrong support size");
        validate_dist(nu, "block measure");
        Process p(GroupSpec::integer_line(), std::move(alphabet));
        p.impl_->data = BlockIIDData{m_block, std::move(nu)};
        return p;
    }

    const GroupPtr& group() const { return impl_->group; }
    const Alphabet& alphabet() const { return impl_->alphabet; }

    /// Exact W-local statistics (the pushforward of the process law onto A^W).
    PatternDist local_statistics(const Window& W) const {
        require_same_group(*impl_->group, *W.group());
        checked_pattern_space(alphabet().size(), W.size());
        return std::visit([&](const auto& d) { return stats_of(d, W); }, impl_->data);
    }

    /// A sample with law local_statistics(W); a pure function of (this, W, seed).
    Pattern sample_pattern(const Window& W, std::uint64_t seed) const {
        Rng rng(seed);
        return sample(W, rng);
    }

    Pattern sample(const Window& W, Rng& rng) const {
        require_same_group(*impl_->group, *W.group());
        return std::visit([&](const auto& d) { return sample_of(d, W, rng); }, impl_->data);
    }

    /// The Bernoulli base measure when this process is (structurally) a
    /// Bernoulli shift: a plain one, a product of such, or a symbol factor of
    /// one. Enables exact entropy-rate shortcuts.
    std::optional<std::vector<Rational>> bernoulli_base() const {
        if (const auto* b = std::get_if<BernoulliData>(&impl_->data)) return b->omega;
        if (const auto* pr = std::get_if<ProductData>(&impl_->data)) {
            auto l = pr->left->bernoulli_base();
            auto r = pr->right->bernoulli_base();
            if (!l || !r) return std::nullopt;
            std::vector<Rational> out;
            out.reserve(l->size() * r->size());
            for (const auto& x : *l)
                for (const auto& y : *r) out.push_back(x * y);
            return out;
        }
        if (const auto* f = std::get_if<FactorData>(&impl_->data)) {
            auto in = f->inner->bernoulli_base();
            if (!in) return std::nullopt;
            std::vector<Rational> out(alphabet().size(), Rational(0));
            for (std::size_t i = 0; i < in->size(); ++i) out[f->beta[i]] += (*in)[i];
            return out;
        }
        return std::nullopt;
    }

    const std::vector<std::vector<Rational>>* markov_matrix() const {
        if (const auto* m = std::get_if<MarkovData>(&impl_->data)) return &m->P;
        return nullptr;
    }
    const std::vector<Rational>* markov_stationary() const {
        if (const auto* m = std::get_if<MarkovData>(&impl_->data)) return &m->pi;
        return nullptr;
    }
    const Process* factor_inner() const {
        if (const auto* f = std::get_if<FactorData>(&impl_->data)) return f->inner.get();
        return nullptr;
    }
    const std::vector<std::size_t>* factor_map() const {
        if (const auto* f = std::get_if<FactorData>(&impl_->data)) return &f->beta;
        return nullptr;
    }
    std::pair<const Process*, const Process*> product_parts() const {
        if (const auto* p = std::get_if<ProductData>(&impl_->data))
            return {p->left.get(), p->right.get()};
        return {nullptr, nullptr};
    }
    std::optional<std::pair<std::size_t, std::vector<Rational>>> block_iid_data() const {
        if (const auto* b = std::get_if<BlockIIDData>(&impl_->data))
            return std::make_pair(b->m_block, b->nu);
        return std::nullopt;
    }

    std::string kind_name() const {
        return std::visit(
            [](const auto& d) -> std::string {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, BernoulliData>) return "bernoulli";
                if constexpr (std::is_same_v<T, MarkovData>) return "markov";
                if constexpr (std::is_same_v<T, FactorData>) return "factor";
                if constexpr (std::is_same_v<T, ProductData>) return "product";
                if constexpr (std::is_same_v<T, BlockIIDData>) return "block_iid";
            },
            impl_->data);
    }

  private:
    struct BernoulliData {
        std::vector<Rational> omega;
    };
    struct MarkovData {
        std::vector<std::vector<Rational>> P;
        std::vector<Rational> pi;
    };
    struct FactorData {
        std::shared_ptr<const Process> inner;
        std::vector<std::size_t> beta;
    };
    struct ProductData {
        std::shared_ptr<const Process> left, right;
    };
    struct BlockIIDData {
        std::size_t m_block;
        std::vector<Rational> nu;
    };
    using Data = std::variant<BernoulliData, MarkovData, FactorData, ProductData, BlockIIDData>;

    struct Impl {
        GroupPtr group;
        Alphabet alphabet;
        Data data{BernoulliData{}};
    };

    Process(GroupPtr g, Alphabet a)
        : impl_(std::make_shared<Impl>(Impl{std::move(g), std::move(a)})) {}

    static void validate_dist(const std::vector<Rational>& v, const char* what) {
        Rational total = 0;
        for (const auto& p : v) {
            if (p < 0) throw validation_error(std::string(what) + " has negative mass");
            total += p;
        }
        Rational err = total - 1;
        if (err < 0) err = -err;
        if (err > tolerance_1e12())
            throw validation_error(std::string(what) + " must sum to 1 (within 1e-12)");
    }

    static std::vector<std::int64_t> z_coords(const Window& W) {
        std::vector<std::int64_t> xs;
        for (const auto& e : W.elements()) xs.push_back(e.coords[0]);
        return xs;  // already sorted, canonical window order
    }

    void require_line(const char* kind) const {
        if (impl_->group->kind() != GroupKind::IntegerLine)
            throw validation_error(std::string(kind) + " processes live over Z only");
    }

    // ---- exact statistics ---------------------------------------------------

    PatternDist stats_of(const BernoulliData& d, const Window& W) const {
        std::vector<Rational> probs{Rational(1)};
        for (std::size_t i = 0; i < W.size(); ++i) {
            std::vector<Rational> next(probs.size() * d.omega.size());
            std::size_t t = 0;
            for (const auto& p : probs)
                for (const auto& w : d.omega) next[t++] = p * w;
            probs = std::move(next);
        }
        return PatternDist(W, alphabet(), std::move(probs));
    }

    static std::vector<std::vector<Rational>> mat_mul(const std::vector<std::vector<Rational>>& a,
                                                      const std::vector<std::vector<Rational>>& b) {
        const std::size_t k = a.size();
        std::vector<std::vector<Rational>> c(k, std::vector<Rational>(k, Rational(0)));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t l = 0; l < k; ++l) {
                if (a[i][l] == 0) continue;
                for (std::size_t j = 0; j < k; ++j) c[i][j] += a[i][l] * b[l][j];
            }
        return c;
    }

    static std::vector<std::vector<Rational>> mat_pow(std::vector<std::vector<Rational>> base,
                                                      std::int64_t e) {
        const std::size_t k = base.size();
        std::vector<std::vector<Rational>> r(k, std::vector<Rational>(k, Rational(0)));
        for (std::size_t i = 0; i < k; ++i) r[i][i] = 1;
        while (e > 0) {
            if (e & 1) r = mat_mul(r, base);
            base = mat_mul(base, base);
            e >>= 1;
        }
        return r;
    }

    PatternDist stats_of(const MarkovData& d, const Window& W) const {
        require_line("Markov");
        const auto xs = z_coords(W);
        const std::size_t k = W.size(), a = alphabet().size();
        std::vector<std::vector<std::vector<Rational>>> bridge;  // P^{gap} per step
        for (std::size_t i = 1; i < k; ++i) bridge.push_back(mat_pow(d.P, xs[i] - xs[i - 1]));
        std::vector<Rational> probs(checked_pattern_space(a, k), Rational(0));
        Pattern pat(k, 0);
        // depth-first product accumulation over window coordinates
        std::vector<Rational> partial(k + 1);
        partial[0] = 1;
        std::size_t pos = 0;
        for (;;) {
            while (pos < k) {
                const Rational& step =
                    pos == 0 ? d.pi[pat[0]] : bridge[pos - 1][pat[pos - 1]][pat[pos]];
                partial[pos + 1] = partial[pos] * step;
                ++pos;
            }
            probs[pattern_index(pat, a)] = partial[k];
            // advance odometer, then redo products from the changed digit
            while (pos > 0 && pat[pos - 1] == a - 1) pat[--pos] = 0;
            if (pos == 0) break;
            ++pat[pos - 1];
            --pos;
        }
        return PatternDist(W, alphabet(), std::move(probs));
    }

    PatternDist stats_of(const FactorData& d, const Window& W) const {
        PatternDist inner = d.inner->local_statistics(W);
        const std::size_t ain = d.inner->alphabet().size(), aout = alphabet().size(), k = W.size();
        std::vector<Rational> out(checked_pattern_space(aout, k), Rational(0));
        for (std::size_t idx = 0; idx < inner.cells(); ++idx) {
            if (inner.probs()[idx] == 0) continue;
            Pattern pat = pattern_from_index(idx, ain, k);
            std::size_t mapped = 0;
            for (auto s : pat) mapped = mapped * aout + d.beta[s];
            out[mapped] += inner.probs()[idx];
        }
        return PatternDist(W, alphabet(), std::move(out));
    }

    PatternDist stats_of(const ProductData& d, const Window& W) const {
        PatternDist ls = d.left->local_statistics(W);
        PatternDist rs = d.right->local_statistics(W);
        const std::size_t al = d.left->alphabet().size(), ar = d.right->alphabet().size();
        const std::size_t k = W.size(), ap = alphabet().size();
        std::vector<Rational> out(checked_pattern_space(ap, k), Rational(0));
        for (std::size_t il = 0; il < ls.cells(); ++il) {
            if (ls.probs()[il] == 0) continue;
            Pattern pl = pattern_from_index(il, al, k);
            for (std::size_t ir = 0; ir < rs.cells(); ++ir) {
                if (rs.probs()[ir] == 0) continue;
                Pattern pr = pattern_from_index(ir, ar, k);
                std::size_t idx = 0;
                for (std::size_t i = 0; i < k; ++i) idx = idx * ap + (pl[i] * ar + pr[i]);
                out[idx] = ls.probs()[il] * rs.probs()[ir];
            }
        }
        return PatternDist(W, alphabet(), std::move(out));
    }

    PatternDist stats_of(const BlockIIDData& d, const Window& W) const {
        require_line("BlockIID");
        const auto xs = z_coords(W);
        const std::size_t a = alphabet().size(), k = W.size();
        const std::int64_t mb = static_cast<std::int64_t>(d.m_block);
        std::vector<Rational> out(checked_pattern_space(a, k), Rational(0));
        const Rational phase_weight(1, mb);

        for (std::int64_t j = 1; j <= mb; ++j) {
            // coordinate c = x + j lands in block i = floor((c-1)/mb) at local
            // offset c - i*mb - 1 in [0, mb)
            std::map<std::int64_t, std::vector<std::pair<std::size_t, std::int64_t>>> blocks;
            for (std::size_t t = 0; t < k; ++t) {
                std::int64_t c = xs[t] + j;
                std::int64_t blk = floor_div(c - 1, mb);
                blocks[blk].push_back({t, c - blk * mb - 1});
            }
            // marginal of nu onto each block's touched offsets
            std::map<std::int64_t, std::vector<Rational>> marg;
            for (const auto& [blk, touched] : blocks) {
                std::vector<Rational> mg(checked_pattern_space(a, touched.size()), Rational(0));
                for (std::size_t bidx = 0; bidx < d.nu.size(); ++bidx) {
                    if (d.nu[bidx] == 0) continue;
                    Pattern bpat = pattern_from_index(bidx, a, d.m_block);
                    std::size_t sub = 0;
                    for (const auto& [t, off] : touched) sub = sub * a + bpat[static_cast<std::size_t>(off)];
                    mg[sub] += d.nu[bidx];
                }
                marg[blk] = std::move(mg);
            }
            for (std::size_t idx = 0; idx < out.size(); ++idx) {
                Pattern pat = pattern_from_index(idx, a, k);
                Rational p = phase_weight;
                for (const auto& [blk, touched] : blocks) {
                    std::size_t sub = 0;
                    for (const auto& [t, off] : touched) sub = sub * a + pat[t];
                    p *= marg[blk][sub];
                    if (p == 0) break;
                }
                out[idx] += p;
            }
        }
        return PatternDist(W, alphabet(), std::move(out));
    }

    // ---- sampling ------------------------------------------------------------

    Pattern sample_of(const BernoulliData& d, const Window& W, Rng& rng) const {
        Pattern out(W.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<std::uint8_t>(sample_categorical(d.omega, rng));
        return out;
    }

    Pattern sample_of(const MarkovData& d, const Window& W, Rng& rng) const {
        require_line("Markov");
        const auto xs = z_coords(W);
        Pattern out(W.size());
        std::size_t state = sample_categorical(d.pi, rng);
        out[0] = static_cast<std::uint8_t>(state);
        for (std::size_t t = 1; t < xs.size(); ++t) {
            for (std::int64_t step = 0; step < xs[t] - xs[t - 1]; ++step)
                state = sample_categorical(d.P[state], rng);
            out[t] = static_cast<std::uint8_t>(state);
        }
        return out;
    }

    Pattern sample_of(const FactorData& d, const Window& W, Rng& rng) const {
        Pattern inner = d.inner->sample(W, rng);
        for (auto& s : inner) s = static_cast<std::uint8_t>(d.beta[s]);
        return inner;
    }

    Pattern sample_of(const ProductData& d, const Window& W, Rng& rng) const {
        Rng lr = rng.child(1), rr = rng.child(2);
        Pattern pl = d.left->sample(W, lr);
        Pattern pr = d.right->sample(W, rr);
        const std::size_t ar = d.right->alphabet().size();
        Pattern out(W.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<std::uint8_t>(pl[i] * ar + pr[i]);
        return out;
    }

    Pattern sample_of(const BlockIIDData& d, const Window& W, Rng& rng) const {
        require_line("BlockIID");
        const auto xs = z_coords(W);
        const std::int64_t mb = static_cast<std::int64_t>(d.m_block);
        const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(d.m_block));
        std::map<std::int64_t, Pattern> sampled;
        Pattern out(W.size());
        for (std::size_t t = 0; t < xs.size(); ++t) {
            std::int64_t c = xs[t] + j;
            std::int64_t blk = floor_div(c - 1, mb);
            auto it = sampled.find(blk);
            if (it == sampled.end()) {
                std::size_t bidx = sample_categorical(d.nu, rng);
                it = sampled.emplace(blk, pattern_from_index(bidx, alphabet().size(), d.m_block)).first;
            }
            out[t] = it->second[static_cast<std::size_t>(c - blk * mb - 1)];
        }
        return out;
    }

    std::shared_ptr<Impl> impl_;
};

}  // namespace sofic
