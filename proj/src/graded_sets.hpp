#pragma once

#include "ultrashift/nat.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ultrashift {

inline Nat binom(const Nat& n, std::uint64_t k) {
    if (n < 0 || Nat(k) > n) return 0;
    Nat r = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

// Finite nonempty position sets S = {s_1 < ... < s_k} drawn from an allowed
// sub-universe of {1, 2, ...}, graded by weight(S) = s_k + k - 1 + bias and
// ordered inside a grade by the ascending list, lexicographically. Used for
// the set side of every listing; the universe callbacks keep it usable for
// constrained families (members of A, complement of A, pinned-first-element).
class GradedSets {
 public:
    // count_leq(p): number of allowed positions <= p; allowed(p): membership.
    GradedSets(std::function<bool(std::uint64_t)> allowed,
               std::function<std::uint64_t(std::uint64_t)> count_leq,
               std::optional<std::uint64_t> max_pos, std::int64_t bias)
        : allowed_(std::move(allowed)),
          count_leq_(std::move(count_leq)),
          max_pos_(max_pos),
          bias_(bias) {}

    // Largest position usable inside weight w (last = w - k + 1 - bias, k >= 1).
    std::int64_t last_for(std::uint64_t w, std::uint64_t k) const {
        return std::int64_t(w) - std::int64_t(k) + 1 - bias_;
    }

    Nat count(std::uint64_t w) const {
        Nat total = 0;
        for (std::uint64_t k = 1;; ++k) {
            std::int64_t last = last_for(w, k);
            if (last < std::int64_t(k)) break;  // k distinct positions need last >= k
            std::uint64_t l = std::uint64_t(last);
            if (max_pos_ && l > *max_pos_) continue;
            if (!allowed_(l)) continue;
            total += binom(Nat(count_leq_(l - 1)), k - 1);
        }
        return total;
    }

    // Completions of a chosen ascending prefix (c elements, last = t) into a
    // weight-w set: the prefix alone plus every proper extension.
    Nat completions(std::uint64_t w, std::uint64_t c, std::uint64_t t) const {
        Nat total = 0;
        // extension size j >= 0, final element last = w - (c + j) + 1 - bias
        for (std::uint64_t j = 0;; ++j) {
            std::int64_t last = last_for(w, c + j);
            if (j == 0) {
                if (last == std::int64_t(t)) total += 1;
                continue;
            }
            if (last <= std::int64_t(t)) break;
            std::uint64_t l = std::uint64_t(last);
            if (max_pos_ && l > *max_pos_) continue;
            if (!allowed_(l)) continue;
            total += binom(Nat(count_leq_(l - 1) - count_leq_(t)), j - 1);
        }
        return total;
    }

    // 1-based position of S inside its grade.
    Nat lex_index(const std::vector<std::uint64_t>& s, std::uint64_t w) const {
        Nat before = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::uint64_t lo = i == 0 ? 1 : s[i - 1] + 1;
            for (std::uint64_t t = lo; t < s[i]; ++t) {
                if (!allowed_(t)) continue;
                before += completions(w, i + 1, t);
            }
            // the proper prefix ending here is lex-smaller when it already
            // has weight w
            if (i + 1 < s.size() &&
                last_for(w, i + 1) == std::int64_t(s[i]))
                before += 1;
        }
        return before + 1;
    }

    // Inverse of lex_index.
    std::vector<std::uint64_t> unrank(std::uint64_t w, Nat idx) const {
        std::vector<std::uint64_t> s;
        std::uint64_t lo = 1;
        for (;;) {
            bool placed = false;
            for (std::uint64_t t = lo;; ++t) {
                std::int64_t hi = last_for(w, s.size() + 1);
                if (std::int64_t(t) > hi) break;
                if (max_pos_ && t > *max_pos_) break;
                if (!allowed_(t)) continue;
                Nat c = completions(w, s.size() + 1, t);
                if (idx <= c) {
                    s.push_back(t);
                    // does the prefix itself close the set here?
                    if (last_for(w, s.size()) == std::int64_t(t)) {
                        if (idx == 1) return s;
                        idx -= 1;
                    }
                    lo = t + 1;
                    placed = true;
                    break;
                }
                idx -= c;
            }
            if (!placed) throw std::out_of_range("GradedSets::unrank: index out of grade");
        }
    }

 private:
    std::function<bool(std::uint64_t)> allowed_;
    std::function<std::uint64_t(std::uint64_t)> count_leq_;
    std::optional<std::uint64_t> max_pos_;
    std::int64_t bias_;
};

}  // namespace ultrashift
