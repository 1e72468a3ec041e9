#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sofic/pattern_dist.hpp"
#include "sofic/process.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic {

/// A microstate: a function psi: [m] -> A, stored as symbol indices.
struct Microstate {
    std::vector<std::uint8_t> psi;

    std::size_t size() const { return psi.size(); }
};

inline Microstate microstate_from(std::initializer_list<int> symbols) {
    Microstate ms;
    for (int s : symbols) ms.psi.push_back(static_cast<std::uint8_t>(s));
    return ms;
}

/// Shannon entropy in nats, with 0 log 0 = 0. Kahan-compensated so uniform
/// distributions come out at log(n) to ~1 ulp.
inline double shannon(const std::vector<Rational>& probs) {
    KahanSum h;
    for (const auto& p : probs) {
        if (p < 0) throw validation_error("shannon: negative mass");
        if (p == 0) continue;
        const double pd = to_double(p);
        h.add(-pd * std::log(pd));
    }
    return h.value();
}

inline double shannon(const PatternDist& d) { return shannon(d.probs()); }

/// Exact total-variation distance (1/2 L1) between two pattern distributions.
inline Rational tv_exact(const PatternDist& d1, const PatternDist& d2) {
    if (!(d1.window() == d2.window()) || !(d1.alphabet() == d2.alphabet()))
        throw validation_error("tv distance requires matching window and alphabet");
    Rational sum = 0;
    for (std::size_t i = 0; i < d1.cells(); ++i) {
        Rational diff = d1.probs()[i] - d2.probs()[i];
        if (diff < 0) diff = -diff;
        sum += diff;
    }
    return sum / 2;
}

inline double tv_distance(const PatternDist& d1, const PatternDist& d2) {
    return to_double(tv_exact(d1, d2));
}

/// Empirical law of p -> (w -> psi(sigma(w) p)) under uniform p in [m];
/// all masses are exact multiples of 1/m.
inline PatternDist empirical_pushforward(const SoficMap& sigma, const Microstate& psi,
                                         const Window& W, const Alphabet& alphabet) {
    if (psi.size() != sigma.size())
        throw validation_error("microstate length must equal the sofic map size");
    require_same_group(*sigma.group(), *W.group());
    for (auto s : psi.psi)
        if (s >= alphabet.size()) throw validation_error("microstate symbol out of alphabet");
    const std::size_t a = alphabet.size();
    const std::size_t cells = checked_pattern_space(a, W.size());
    std::vector<Permutation> window_perms;
    for (const auto& el : W.elements()) window_perms.push_back(sigma.eval(el));
    std::vector<std::int64_t> counts(cells, 0);
    for (std::size_t p = 0; p < sigma.size(); ++p) {
        std::size_t idx = 0;
        for (const auto& perm : window_perms) idx = idx * a + psi.psi[perm(p)];
        ++counts[idx];
    }
    std::vector<Rational> probs(cells);
    const std::int64_t m = static_cast<std::int64_t>(sigma.size());
    for (std::size_t i = 0; i < cells; ++i) probs[i] = Rational(counts[i], m);
    return PatternDist(W, alphabet, std::move(probs));
}

/// d_W((sigma,psi), phi): TV distance between the process's W-statistics and
/// the microstate's empirical W-statistics, exact.
inline Rational d_w_exact(const SoficMap& sigma, const Microstate& psi, const Process& proc,
                          const Window& W) {
    return tv_exact(proc.local_statistics(W),
                    empirical_pushforward(sigma, psi, W, proc.alphabet()));
}

inline double d_w(const SoficMap& sigma, const Microstate& psi, const Process& proc,
                  const Window& W) {
    return to_double(d_w_exact(sigma, psi, proc, W));
}

}  // namespace sofic
