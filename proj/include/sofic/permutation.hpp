#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "sofic/common.hpp"

namespace sofic {

/// Permutation of {0,...,m-1} in image-array form. The paper's points are
/// 1-based; the 1-based convention appears only at serialization boundaries.
class Permutation {
  public:
    Permutation() = default;

    static Permutation identity(std::size_t m) {
        Permutation p;
        p.img_.resize(m);
        std::iota(p.img_.begin(), p.img_.end(), 0u);
        return p;
    }

    static Permutation from_images(std::vector<std::uint32_t> img) {
        Permutation p;
        p.img_ = std::move(img);
        if (!p.is_bijection()) throw validation_error("permutation images are not a bijection");
        return p;
    }

    std::size_t size() const { return img_.size(); }
    std::uint32_t operator()(std::size_t p) const { return img_[p]; }
    const std::vector<std::uint32_t>& images() const { return img_; }

    bool is_bijection() const {
        std::vector<bool> seen(img_.size(), false);
        for (auto v : img_) {
            if (v >= img_.size() || seen[v]) return false;
            seen[v] = true;
        }
        return true;
    }

    bool is_identity() const {
        for (std::size_t i = 0; i < img_.size(); ++i)
            if (img_[i] != i) return false;
        return true;
    }

    /// this ∘ other: p -> this(other(p)).
    Permutation compose(const Permutation& other) const {
        if (size() != other.size()) throw validation_error("composing permutations of different sizes");
        Permutation r;
        r.img_.resize(size());
        for (std::size_t p = 0; p < size(); ++p) r.img_[p] = img_[other.img_[p]];
        return r;
    }

    Permutation inverse() const {
        Permutation r;
        r.img_.resize(size());
        for (std::size_t p = 0; p < size(); ++p) r.img_[img_[p]] = static_cast<std::uint32_t>(p);
        return r;
    }

    /// Arbitrary integer power in O(m) via cycle decomposition.
    Permutation power(std::int64_t e) const {
        const std::size_t m = size();
        Permutation r;
        r.img_.resize(m);
        std::vector<bool> done(m, false);
        std::vector<std::uint32_t> cycle;
        for (std::size_t start = 0; start < m; ++start) {
            if (done[start]) continue;
            cycle.clear();
            std::uint32_t p = static_cast<std::uint32_t>(start);
            do {
                cycle.push_back(p);
                done[p] = true;
                p = img_[p];
            } while (p != start);
            const std::int64_t len = static_cast<std::int64_t>(cycle.size());
            const std::int64_t shift = mod_positive(e, len);
            for (std::int64_t i = 0; i < len; ++i)
                r.img_[cycle[i]] = cycle[(i + shift) % len];
        }
        return r;
    }

    bool operator==(const Permutation&) const = default;

  private:
    std::vector<std::uint32_t> img_;
};

}  // namespace sofic
