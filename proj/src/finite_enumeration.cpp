#include "ultrashift/builtins.hpp"
#include "ultrashift/enumeration.hpp"

#include "graded_sets.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace ultrashift {

namespace {

// Listing for finite ultragraphs. Weight of (alpha, B) is
// |alpha|^2 + maxEdgePos(alpha) + setWeight(B), where the canonical full
// restriction B = r(last) weighs 0 (serialized as the range token) and an
// explicit set weighs maxVertexPos + |S| - 1; a length-0 ultrapath weighs
// setWeight alone. Within a grade: (|alpha|, edge list, set key), the range
// token ordering before explicit lists.
class FiniteEnumeration final : public Enumeration {
 public:
    explicit FiniteEnumeration(Ultragraph g)
        : g_(std::move(g)),
          nv_(g_.vertex_count()),
          ne_(g_.edge_count()),
          sets_([this](std::uint64_t p) { return p >= 1 && p <= nv_; },
                [this](std::uint64_t p) { return std::min<std::uint64_t>(p, nv_); },
                nv_, 0) {
        if (nv_ == 0 || ne_ == 0) throw std::invalid_argument("finite enumeration: empty graph");
        if (nv_ > 16 || ne_ > 64)
            throw std::invalid_argument("finite enumeration: graph too large for set handling");
        fb_ = dynamic_cast<const FiniteBackend*>(&g_.backend());
        if (!fb_) throw std::invalid_argument("finite enumeration: wrong backend");
        follows_.assign(ne_, {});
        for (std::uint64_t e = 0; e < ne_; ++e)
            for (std::uint64_t f = 0; f < ne_; ++f)
                if (g_.edge_follows(EdgeId{e}, EdgeId{f})) follows_[e].push_back(f);
    }

    const Ultragraph& graph() const override { return g_; }
    std::string name() const override { return "canonical/finite-v1"; }

    Nat rank(const Ultrapath& p) const override;
    Ultrapath unrank(const Nat& i) const override;
    Nat min_rank_of_length(std::uint64_t n) const override;
    std::optional<Nat> min_rank_restricted(const FinitePath& alpha,
                                           const SetConstraint& c) const override;

 private:
    Ultragraph g_;
    std::uint64_t nv_, ne_;
    const FiniteBackend* fb_;
    GradedSets sets_;
    std::vector<std::vector<std::uint64_t>> follows_;

    mutable std::mutex mu_;
    // paths_[l][m][f][t]: length l+1 paths starting at f ending at t with all
    // edge positions <= m (m index 0..ne_).
    mutable std::vector<std::vector<std::vector<std::vector<Nat>>>> paths_;
    mutable std::vector<Nat> grade_cum_;  // grade_cum_[g] = total ranks in grades <= g
    // per-edge explicit restriction lists bucketed by weight, sorted lex
    mutable std::vector<std::map<std::uint64_t, std::vector<std::vector<std::uint64_t>>>>
        extras_;
    mutable std::vector<bool> extras_ready_;

    static std::uint64_t vpos(std::uint64_t v) { return v + 1; }
    static std::uint64_t epos(std::uint64_t e) { return e + 1; }

    std::uint64_t set_weight(const std::vector<std::uint64_t>& values) const {
        // values are vertex values, sorted
        return vpos(values.back()) + values.size() - 1;
    }

    void ensure_paths(std::size_t len) const;  // mu_ held
    void ensure_extras(std::uint64_t e) const;  // mu_ held

    // number of explicit-set restrictions of weight s on a path ending at t,
    // plus the token at weight 0
    Nat extras_count(std::uint64_t t, std::int64_t s) const {
        if (s == 0) return 1;
        if (s < 0) return 0;
        ensure_extras(t);
        auto it = extras_[t].find(std::uint64_t(s));
        return it == extras_[t].end() ? Nat(0) : Nat(it->second.size());
    }

    // paths of length l starting at f (inclusive), positions <= m, ending at t
    const Nat& pcount(std::size_t l, std::uint64_t m, std::uint64_t f, std::uint64_t t) const {
        static const Nat zero = 0;
        if (l == 0) throw std::logic_error("pcount: zero length");
        ensure_paths(l);
        if (m > ne_) m = ne_;
        return paths_[l - 1][m][f][t];
    }

    // completions of a fixed prefix (prefix_max over its positions, last edge
    // f, i+1 edges placed) into weight-w pairs of total path length L
    Nat prefix_completions(std::uint64_t w, std::size_t L, std::size_t placed,
                           std::uint64_t prefix_max, std::uint64_t f) const;

    Nat grade_paths(std::uint64_t w, std::size_t L) const;  // all length-L pairs in grade w
    Nat grade_size(std::uint64_t w) const;
    const Nat& cum(std::uint64_t w) const;  // grades <= w, cached

    std::uint64_t weight_of(const Ultrapath& p, CanonSet& canon, bool& is_token) const;
};

void FiniteEnumeration::ensure_paths(std::size_t len) const {
    while (paths_.size() < len) {
        std::size_t l = paths_.size() + 1;
        std::vector<std::vector<std::vector<Nat>>> layer(
            ne_ + 1, std::vector<std::vector<Nat>>(ne_, std::vector<Nat>(ne_, 0)));
        for (std::uint64_t m = 1; m <= ne_; ++m) {
            for (std::uint64_t f = 0; f < ne_; ++f) {
                if (epos(f) > m) continue;
                if (l == 1) {
                    layer[m][f][f] = 1;
                    continue;
                }
                for (auto s : follows_[f]) {
                    if (epos(s) > m) continue;
                    for (std::uint64_t t = 0; t < ne_; ++t)
                        layer[m][f][t] += paths_[l - 2][m][s][t];
                }
            }
        }
        paths_.push_back(std::move(layer));
    }
}

void FiniteEnumeration::ensure_extras(std::uint64_t e) const {
    if (extras_ready_.empty()) {
        extras_ready_.assign(ne_, false);
        extras_.resize(ne_);
    }
    if (extras_ready_[e]) return;
    const auto& r = fb_->range_verts(EdgeId{e});
    const std::size_t n = r.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
        std::vector<std::uint64_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::uint64_t(1) << i)) s.push_back(r[i]);
        if (s.size() == n) continue;  // the full range is the token
        extras_[e][set_weight(s)].push_back(std::move(s));
    }
    for (auto& [w, lst] : extras_[e]) std::sort(lst.begin(), lst.end());
    extras_ready_[e] = true;
}

Nat FiniteEnumeration::prefix_completions(std::uint64_t w, std::size_t L, std::size_t placed,
                                          std::uint64_t prefix_max, std::uint64_t f) const {
    const std::int64_t budget = std::int64_t(w) - std::int64_t(L) * std::int64_t(L);
    if (budget < 0) return 0;
    Nat total = 0;
    const std::size_t suffix = L - placed;
    if (suffix == 0) {
        total += extras_count(f, budget - std::int64_t(prefix_max));
        return total;
    }
    for (auto s : follows_[f]) {
        // suffix max <= prefix_max: the total max stays prefix_max
        for (std::uint64_t t = 0; t < ne_; ++t) {
            const Nat& le = pcount(suffix, prefix_max, s, t);
            if (le != 0) total += le * extras_count(t, budget - std::int64_t(prefix_max));
        }
        // suffix max = M beyond the prefix
        for (std::uint64_t M = prefix_max + 1; M <= ne_; ++M) {
            for (std::uint64_t t = 0; t < ne_; ++t) {
                Nat exact = pcount(suffix, M, s, t) - pcount(suffix, M - 1, s, t);
                if (exact != 0) total += exact * extras_count(t, budget - std::int64_t(M));
            }
        }
    }
    return total;
}

Nat FiniteEnumeration::grade_paths(std::uint64_t w, std::size_t L) const {
    if (L == 0 || Nat(L) * L >= w) return 0;
    const std::int64_t budget = std::int64_t(w) - std::int64_t(L) * std::int64_t(L);
    Nat total = 0;
    for (std::uint64_t M = 1; M <= ne_ && std::int64_t(M) <= budget; ++M) {
        for (std::uint64_t f = 0; f < ne_; ++f) {
            for (std::uint64_t t = 0; t < ne_; ++t) {
                Nat exact = pcount(L, M, f, t) - pcount(L, M - 1, f, t);
                if (exact != 0) total += exact * extras_count(t, budget - std::int64_t(M));
            }
        }
    }
    return total;
}

Nat FiniteEnumeration::grade_size(std::uint64_t w) const {
    Nat total = sets_.count(w);
    for (std::size_t L = 1; Nat(L) * L < w; ++L) total += grade_paths(w, L);
    return total;
}

const Nat& FiniteEnumeration::cum(std::uint64_t w) const {
    if (grade_cum_.empty()) grade_cum_.push_back(0);  // grade 0 empty
    while (grade_cum_.size() <= w)
        grade_cum_.push_back(grade_cum_.back() + grade_size(grade_cum_.size()));
    return grade_cum_[w];
}

std::uint64_t FiniteEnumeration::weight_of(const Ultrapath& p, CanonSet& canon,
                                           bool& is_token) const {
    canon = g_.canonicalize(p.restriction);
    if (canon.empty()) throw std::invalid_argument("rank: empty restriction");
    is_token = false;
    if (p.alpha.empty()) return set_weight(canon.finite);
    std::uint64_t maxpos = 0;
    for (auto e : p.alpha.edges) maxpos = std::max(maxpos, epos(e.value));
    const auto& r = fb_->range_verts(p.alpha.edges.back());
    is_token = canon.finite == r;
    std::uint64_t extra = is_token ? 0 : set_weight(canon.finite);
    return p.alpha.length() * p.alpha.length() + maxpos + extra;
}

Nat FiniteEnumeration::rank(const Ultrapath& p) const {
    std::lock_guard<std::mutex> lk(mu_);
    CanonSet canon;
    bool token = false;
    const std::uint64_t w = weight_of(p, canon, token);
    Nat r = cum(w - 1);
    if (p.alpha.empty()) {
        std::vector<std::uint64_t> positions;
        for (auto v : canon.finite) positions.push_back(vpos(v));
        return r + sets_.lex_index(positions, w);
    }
    const std::size_t L = p.alpha.length();
    r += sets_.count(w);
    for (std::size_t l = 1; l < L; ++l) r += grade_paths(w, l);
    // same length, lexicographically earlier paths
    std::uint64_t pref_max = 0;
    for (std::size_t i = 0; i < L; ++i) {
        const std::uint64_t ai = p.alpha.edges[i].value;
        if (i == 0) {
            for (std::uint64_t f = 0; f < ai; ++f)
                r += prefix_completions(w, L, 1, epos(f), f);
        } else {
            for (auto f : follows_[p.alpha.edges[i - 1].value]) {
                if (f >= ai) continue;
                r += prefix_completions(w, L, i + 1, std::max(pref_max, epos(f)), f);
            }
        }
        pref_max = std::max(pref_max, epos(ai));
    }
    // same path, earlier restriction keys; the token sits in its own grade
    if (!token) {
        const std::uint64_t t = p.alpha.edges.back().value;
        const std::int64_t s = std::int64_t(w) - std::int64_t(L) * std::int64_t(L) -
                               std::int64_t(pref_max);
        ensure_extras(t);
        const auto& lst = extras_[t].at(std::uint64_t(s));
        auto it = std::lower_bound(lst.begin(), lst.end(), canon.finite);
        r += Nat(it - lst.begin());
    }
    return r + 1;
}

Ultrapath FiniteEnumeration::unrank(const Nat& i) const {
    std::lock_guard<std::mutex> lk(mu_);
    if (i < 1) throw std::out_of_range("unrank: ranks start at 1");
    std::uint64_t w = 1;
    while (cum(w) < i) ++w;
    Nat idx = i - cum(w - 1);
    Nat sc = sets_.count(w);
    if (idx <= sc) {
        auto positions = sets_.unrank(w, idx);
        std::vector<VertexId> vs;
        for (auto p : positions) vs.push_back(VertexId{p - 1});
        return Ultrapath{FinitePath{}, SetExpr::explicit_set(std::move(vs))};
    }
    idx -= sc;
    for (std::size_t L = 1;; ++L) {
        if (Nat(L) * L >= w) throw std::logic_error("unrank: grade exhausted");
        Nat c = grade_paths(w, L);
        if (idx > c) {
            idx -= c;
            continue;
        }
        // reconstruct edges, lexicographically
        std::vector<EdgeId> alpha;
        std::uint64_t pref_max = 0;
        for (std::size_t pos = 0; pos < L; ++pos) {
            bool placed = false;
            std::vector<std::uint64_t> cands;
            if (pos == 0) {
                for (std::uint64_t f = 0; f < ne_; ++f) cands.push_back(f);
            } else {
                cands = follows_[alpha.back().value];
                std::sort(cands.begin(), cands.end());
            }
            for (auto f : cands) {
                Nat c2 = prefix_completions(w, L, pos + 1, std::max(pref_max, epos(f)), f);
                if (idx <= c2) {
                    alpha.push_back(EdgeId{f});
                    pref_max = std::max(pref_max, epos(f));
                    placed = true;
                    break;
                }
                idx -= c2;
            }
            if (!placed) throw std::logic_error("unrank: no edge fits");
        }
        const std::uint64_t t = alpha.back().value;
        const std::int64_t s = std::int64_t(w) - std::int64_t(L) * std::int64_t(L) -
                               std::int64_t(pref_max);
        if (s == 0) {
            if (idx != 1) throw std::logic_error("unrank: token slot mismatch");
            FinitePath fp{std::move(alpha)};
            SetExpr tok = SetExpr::range(fp.edges.back());
            return Ultrapath{std::move(fp), std::move(tok)};
        }
        ensure_extras(t);
        const auto& lst = extras_[t].at(std::uint64_t(s));
        const auto& values = lst.at(to_u64(idx - 1));
        std::vector<VertexId> vs;
        for (auto v : values) vs.push_back(VertexId{v});
        return Ultrapath{FinitePath{std::move(alpha)}, SetExpr::explicit_set(std::move(vs))};
    }
}

Nat FiniteEnumeration::min_rank_of_length(std::uint64_t n) const {
    std::lock_guard<std::mutex> lk(mu_);
    if (n == 0) return 1;
    const std::uint64_t guard = n * n + ne_ + 2 * nv_ + 2;
    for (std::uint64_t w = n * n + 1; w <= guard; ++w) {
        Nat longer = 0;
        for (std::size_t L = n; Nat(L) * L < w; ++L) longer += grade_paths(w, L);
        if (longer == 0) continue;
        Nat r = cum(w - 1) + sets_.count(w);
        for (std::size_t L = 1; L < n; ++L) r += grade_paths(w, L);
        return r + 1;
    }
    throw std::logic_error("min_rank_of_length: no path of that length (sink?)");
}

std::optional<Nat> FiniteEnumeration::min_rank_restricted(const FinitePath& alpha,
                                                          const SetConstraint& c) const {
    auto satisfies = [&](const std::vector<std::uint64_t>& values) {
        if (c.must_contain &&
            !std::binary_search(values.begin(), values.end(), c.must_contain->value))
            return false;
        if (c.must_not_contain &&
            std::binary_search(values.begin(), values.end(), c.must_not_contain->value))
            return false;
        auto includes = [&](const CanonSet& s) {
            if (s.includes_a) return false;  // nothing infinite in a finite graph
            for (auto v : s.finite)
                if (!std::binary_search(values.begin(), values.end(), v)) return false;
            return true;
        };
        if (c.must_include && !includes(*c.must_include)) return false;
        if (c.must_not_include && includes(*c.must_not_include)) return false;
        return true;
    };

    std::vector<std::uint64_t> universe;
    if (alpha.empty()) {
        for (std::uint64_t v = 0; v < nv_; ++v) universe.push_back(v);
    } else {
        universe = fb_->range_verts(alpha.edges.back());
    }
    const std::size_t n = universe.size();
    bool token_ok = !alpha.empty() && satisfies(universe);

    // best explicit candidate by (weight, lex)
    std::optional<std::vector<std::uint64_t>> best;
    std::uint64_t best_w = 0;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
        std::vector<std::uint64_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::uint64_t(1) << i)) s.push_back(universe[i]);
        if (!alpha.empty() && s.size() == n) continue;  // that is the token
        if (!satisfies(s)) continue;
        std::uint64_t wt = set_weight(s);
        if (!best || wt < best_w || (wt == best_w && s < *best)) {
            best = std::move(s);
            best_w = wt;
        }
    }

    std::optional<Nat> out;
    if (token_ok) {
        Ultrapath tok{alpha, SetExpr::range(alpha.edges.back())};
        out = rank(tok);
    }
    if (best) {
        std::vector<VertexId> vs;
        for (auto v : *best) vs.push_back(VertexId{v});
        Ultrapath up{alpha, SetExpr::explicit_set(std::move(vs))};
        Nat r = rank(up);
        if (!out || r < *out) out = r;
    }
    return out;
}

}  // namespace

EnumerationPtr finite_enumeration(const Ultragraph& g) {
    return std::make_shared<FiniteEnumeration>(g);
}

}  // namespace ultrashift
