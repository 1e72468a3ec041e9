#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sofic/common.hpp"
#include "sofic/group.hpp"

namespace sofic {

/// Finite symbol alphabet. Symbols are indices internally; names only matter
/// at serialization boundaries.
class Alphabet {
  public:
    explicit Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.empty()) throw validation_error("alphabet must be nonempty");
        for (const auto& n : names_) {
            if (n.empty() || n.find('|') != std::string::npos)
                throw validation_error("alphabet symbols must be nonempty and '|'-free");
        }
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j]) throw validation_error("duplicate alphabet symbol");
    }

    static Alphabet binary() { return Alphabet({"0", "1"}); }

    static Alphabet indexed(std::size_t k) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
        return Alphabet(std::move(names));
    }

    static Alphabet pair(const Alphabet& a, const Alphabet& b) {
        std::vector<std::string> names;
        for (const auto& x : a.names_)
            for (const auto& y : b.names_) names.push_back(x + "," + y);
        return Alphabet(std::move(names));
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        throw validation_error("unknown symbol '" + name + "'");
    }

    bool operator==(const Alphabet& o) const { return names_ == o.names_; }

  private:
    std::vector<std::string> names_;
};

/// Guard helper: |A|^|W| cells, refused above `limit`.
inline std::size_t checked_pattern_space(std::size_t alphabet, std::size_t window,
                                         std::size_t limit = 10'000'000) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < window; ++i) {
        if (cells > limit / alphabet)
            throw guard_error("pattern space |A|^|W| exceeds guard of " + std::to_string(limit));
        cells *= alphabet;
    }
    return cells;
}

/// A pattern assigns a symbol to every window element (in canonical window
/// order). Indexing is big-endian base |A| over that order.
using Pattern = std::vector<std::uint8_t>;

inline std::size_t pattern_index(const Pattern& pat, std::size_t alphabet) {
    std::size_t idx = 0;
    for (auto s : pat) idx = idx * alphabet + s;
    return idx;
}

inline Pattern pattern_from_index(std::size_t idx, std::size_t alphabet, std::size_t window) {
    Pattern pat(window);
    for (std::size_t i = window; i-- > 0;) {
        pat[i] = static_cast<std::uint8_t>(idx % alphabet);
        idx /= alphabet;
    }
    return pat;
}

/// Probability distribution on A^W with exact rational masses, stored dense in
/// canonical pattern order.
class PatternDist {
  public:
    PatternDist(Window window, Alphabet alphabet, std::vector<Rational> probs)
        : window_(std::move(window)), alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
        const std::size_t cells = checked_pattern_space(alphabet_.size(), window_.size());
        if (probs_.size() != cells)
            throw validation_error("pattern distribution has wrong support size");
        Rational total = 0;
        for (const auto& p : probs_) {
            if (p < 0) throw validation_error("negative probability mass");
            total += p;
        }
        Rational err = total - 1;
        if (err < 0) err = -err;
        if (err > tolerance_1e12())
            throw validation_error("pattern distribution must sum to 1 (within 1e-12)");
    }

    const Window& window() const { return window_; }
    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<Rational>& probs() const { return probs_; }
    std::size_t cells() const { return probs_.size(); }

    const Rational& prob(const Pattern& pat) const {
        return probs_.at(pattern_index(pat, alphabet_.size()));
    }

    /// Marginal onto a sub-window (projection of patterns).
    PatternDist project(const Window& sub) const {
        if (!window_.contains(sub))
            throw validation_error("projection target is not a sub-window");
        std::vector<std::size_t> keep;
        for (const auto& e : sub.elements()) {
            std::size_t pos = 0;
            while (window_.elements()[pos] != e) ++pos;
            keep.push_back(pos);
        }
        const std::size_t a = alphabet_.size();
        std::vector<Rational> out(checked_pattern_space(a, sub.size()), Rational(0));
        for (std::size_t idx = 0; idx < probs_.size(); ++idx) {
            if (probs_[idx] == 0) continue;
            Pattern pat = pattern_from_index(idx, a, window_.size());
            std::size_t sub_idx = 0;
            for (auto pos : keep) sub_idx = sub_idx * a + pat[pos];
            out[sub_idx] += probs_[idx];
        }
        return PatternDist(sub, alphabet_, std::move(out));
    }

    std::string pattern_string(std::size_t idx) const {
        Pattern pat = pattern_from_index(idx, alphabet_.size(), window_.size());
        std::string s;
        for (std::size_t i = 0; i < pat.size(); ++i) {
            if (i) s += "|";
            s += alphabet_.name(pat[i]);
        }
        return s;
    }

  private:
    Window window_;
    Alphabet alphabet_;
    std::vector<Rational> probs_;
};

}  // namespace sofic
