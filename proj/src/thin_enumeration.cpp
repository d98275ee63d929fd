#include "ultrashift/builtins.hpp"
#include "ultrashift/enumeration.hpp"

#include "graded_sets.hpp"

#include <algorithm>
#include <mutex>

namespace ultrashift {

namespace {

// Fibonacci with F(1) = F(2) = 1; F(g) counts the finite position sets of
// weight g (weight = last + size - 1) over an unconstrained tail universe.
class FibCache {
 public:
    Nat at(std::int64_t n) const {
        if (n <= 0) return 0;
        std::lock_guard<std::mutex> lk(mu_);
        while (std::int64_t(v_.size()) <= n) {
            std::size_t s = v_.size();
            v_.push_back(v_[s - 1] + v_[s - 2]);
        }
        return v_[std::size_t(n)];
    }
    // F(1) + ... + F(n)
    Nat prefix(std::int64_t n) const {
        if (n <= 0) return 0;
        return at(n + 2) - 1;
    }

 private:
    mutable std::mutex mu_;
    mutable std::vector<Nat> v_{0, 1, 1};
};

// Finite sets over positions {lo, lo+1, ...}, weight = last + size - 1 + bias,
// counted and lex-indexed in closed form via the Fibonacci diagonals.
class PlainSets {
 public:
    PlainSets(std::uint64_t lo, std::int64_t bias, const FibCache& fib)
        : lo_(lo), bias_(bias), fib_(fib) {}

    // reduced weight in the shifted coordinate system
    std::int64_t reduced(std::uint64_t w) const {
        return std::int64_t(w) - std::int64_t(lo_) + 1 - bias_;
    }

    Nat count(std::uint64_t w) const { return fib_.at(reduced(w)); }

    // completions of a c-element prefix with last element t (both in real
    // positions) into weight-w sets
    Nat completions(std::uint64_t w, std::uint64_t c, std::uint64_t t) const {
        std::int64_t d = reduced(w) - std::int64_t(c) - (std::int64_t(t) - std::int64_t(lo_) + 1);
        Nat out = fib_.at(d);
        if (d == -1) out += 1;
        return out;
    }

    Nat lex_index(const std::vector<std::uint64_t>& s, std::uint64_t w) const {
        Nat before = 0;
        const std::int64_t wr = reduced(w);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::int64_t c = std::int64_t(i) + 1;
            const std::int64_t a = i == 0 ? 1 : std::int64_t(s[i - 1] - lo_ + 1) + 1;
            const std::int64_t b = std::int64_t(s[i] - lo_ + 1) - 1;  // shifted range [a, b]
            if (b >= a) {
                // sum of completions over t' in [a, b]: d runs over
                // [wr - c - b, wr - c - a]
                std::int64_t dlo = wr - c - b, dhi = wr - c - a;
                before += fib_.prefix(dhi) - fib_.prefix(dlo - 1);
                if (dlo <= -1 && -1 <= dhi) before += 1;
            }
            if (i + 1 < s.size() && wr - c + 1 == std::int64_t(s[i] - lo_ + 1)) before += 1;
        }
        return before + 1;
    }

    std::vector<std::uint64_t> unrank(std::uint64_t w, Nat idx) const {
        std::vector<std::uint64_t> s;
        std::uint64_t lo = lo_;
        for (;;) {
            bool placed = false;
            for (std::uint64_t t = lo;; ++t) {
                std::int64_t d = reduced(w) - std::int64_t(s.size() + 1) -
                                 (std::int64_t(t) - std::int64_t(lo_) + 1);
                if (d < -1) break;
                Nat c = fib_.at(d) + (d == -1 ? 1 : 0);
                if (idx <= c) {
                    s.push_back(t);
                    if (d == -1) {
                        if (idx != 1) throw std::logic_error("PlainSets::unrank: bad index");
                        return s;
                    }
                    lo = t + 1;
                    placed = true;
                    break;
                }
                idx -= c;
            }
            if (!placed) throw std::out_of_range("PlainSets::unrank: index out of grade");
        }
    }

 private:
    std::uint64_t lo_;
    std::int64_t bias_;
    const FibCache& fib_;
};

std::vector<std::uint64_t> canon_positions(const CanonSet& c, std::uint64_t shift) {
    std::vector<std::uint64_t> out;
    out.reserve(c.finite.size());
    for (auto v : c.finite) out.push_back(v + shift);
    return out;
}

// Greedy minimal explicit set satisfying a constraint over a plain vertex
// universe: the union of the positive requirements, which is the unique
// weight-minimal satisfying set when it passes the negative clauses.
std::optional<std::vector<std::uint64_t>> greedy_explicit(
    const SetConstraint& c, std::uint64_t min_vertex,
    const std::function<bool(std::uint64_t)>& vertex_ok) {
    if (c.must_include && c.must_include->includes_a) return std::nullopt;
    std::vector<std::uint64_t> s;
    if (c.must_include) s = c.must_include->finite;
    if (c.must_contain) {
        s.push_back(c.must_contain->value);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    for (auto v : s)
        if (v < min_vertex || !vertex_ok(v)) return std::nullopt;
    auto violates = [&](const std::vector<std::uint64_t>& cand) {
        if (c.must_not_contain &&
            std::binary_search(cand.begin(), cand.end(), c.must_not_contain->value))
            return true;
        if (c.must_not_include && !c.must_not_include->includes_a) {
            bool inc = true;
            for (auto v : c.must_not_include->finite)
                if (!std::binary_search(cand.begin(), cand.end(), v)) inc = false;
            if (inc) return true;
        }
        return false;
    };
    if (!s.empty()) {
        if (violates(s)) return std::nullopt;  // every superset violates too
        return s;
    }
    // no positive requirement: smallest admissible singleton
    for (std::uint64_t v = min_vertex; v < min_vertex + 3; ++v) {
        if (!vertex_ok(v)) continue;
        std::vector<std::uint64_t> cand{v};
        if (!violates(cand)) return cand;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- line ----

// Vertices v_1, v_2, ... at positions n; run e_i..e_j weighs L^2 + j and
// carries only the token restriction {v_{j+1}}.
class LineEnumeration final : public Enumeration {
 public:
    explicit LineEnumeration(Ultragraph g) : g_(std::move(g)), sets_(1, 0, fib_) {
        if (g_.kind() != "line") throw std::invalid_argument("line enumeration: wrong backend");
    }

    const Ultragraph& graph() const override { return g_; }
    std::string name() const override { return "canonical/line-v1"; }

    static std::uint64_t runs_in_grade(std::uint64_t w) {
        std::uint64_t n = 0;
        for (std::uint64_t l = 1; l * l + l <= w; ++l) ++n;
        return n;
    }

    Nat grade_size(std::uint64_t w) const { return sets_.count(w) + runs_in_grade(w); }

    Nat cum(std::uint64_t w) const {
        std::lock_guard<std::mutex> lk(mu_);
        if (cum_.empty()) cum_.push_back(0);
        while (cum_.size() <= w) cum_.push_back(cum_.back() + grade_size(cum_.size()));
        return cum_[w];
    }

    Nat rank(const Ultrapath& p) const override {
        CanonSet canon = g_.canonicalize(p.restriction);
        if (canon.empty()) throw std::invalid_argument("rank: empty restriction");
        if (p.alpha.empty()) {
            std::uint64_t w = canon.finite.back() + canon.finite.size() - 1;
            return cum(w - 1) + sets_.lex_index(canon.finite, w);
        }
        const std::uint64_t L = p.alpha.length();
        const std::uint64_t j = p.alpha.edges.back().value;
        if (canon.finite != std::vector<std::uint64_t>{j + 1})
            throw std::invalid_argument("rank: not a line ultrapath");
        const std::uint64_t w = L * L + j;
        return cum(w - 1) + sets_.count(w) + L;
    }

    Ultrapath unrank(const Nat& i) const override {
        if (i < 1) throw std::out_of_range("unrank: ranks start at 1");
        std::uint64_t w = 1;
        while (cum(w) < i) ++w;
        Nat idx = i - cum(w - 1);
        Nat sc = sets_.count(w);
        if (idx <= sc) {
            auto values = sets_.unrank(w, idx);
            std::vector<VertexId> vs;
            for (auto v : values) vs.push_back(VertexId{v});
            return Ultrapath{FinitePath{}, SetExpr::explicit_set(std::move(vs))};
        }
        std::uint64_t l = to_u64(idx - sc);
        std::uint64_t j = w - l * l;
        FinitePath fp;
        for (std::uint64_t e = j - l + 1; e <= j; ++e) fp.edges.push_back(EdgeId{e});
        SetExpr tok = SetExpr::range(fp.edges.back());
        return Ultrapath{std::move(fp), std::move(tok)};
    }

    Nat min_rank_of_length(std::uint64_t n) const override {
        if (n == 0) return 1;
        const std::uint64_t w = n * n + n;
        return cum(w - 1) + sets_.count(w) + n;
    }

    std::optional<Nat> min_rank_restricted(const FinitePath& alpha,
                                           const SetConstraint& c) const override {
        if (alpha.empty()) {
            auto s = greedy_explicit(c, 1, [](std::uint64_t) { return true; });
            if (!s) return std::nullopt;
            if (c.must_include && c.must_include->includes_a) return std::nullopt;
            std::uint64_t w = s->back() + s->size() - 1;
            return cum(w - 1) + sets_.lex_index(*s, w);
        }
        const std::uint64_t j = alpha.edges.back().value;
        const std::uint64_t tok = j + 1;
        if (c.must_contain && c.must_contain->value != tok) return std::nullopt;
        if (c.must_not_contain && c.must_not_contain->value == tok) return std::nullopt;
        if (c.must_include) {
            if (c.must_include->includes_a) return std::nullopt;
            for (auto v : c.must_include->finite)
                if (v != tok) return std::nullopt;
        }
        if (c.must_not_include && !c.must_not_include->includes_a) {
            bool inc = true;
            for (auto v : c.must_not_include->finite)
                if (v != tok) inc = false;
            if (inc && !c.must_not_include->finite.empty()) return std::nullopt;
        }
        const std::uint64_t L = alpha.length();
        const std::uint64_t w = L * L + j;
        return cum(w - 1) + sets_.count(w) + L;
    }

 private:
    Ultragraph g_;
    FibCache fib_;
    PlainSets sets_;
    mutable std::mutex mu_;
    mutable std::vector<Nat> cum_;
};

// ------------------------------------------------------------ loopline ----

struct LoopPathEntry {
    std::vector<std::uint64_t> edges;
    int setkey;  // 0 token, 1 {u}, 2 {v_1}
};

bool operator<(const LoopPathEntry& a, const LoopPathEntry& b) {
    if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
    if (a.edges != b.edges) return a.edges < b.edges;
    return a.setkey < b.setkey;
}

// Loop g (edge 0) at u plus the line; positions are value + 1.
class LooplineEnumeration final : public Enumeration {
 public:
    explicit LooplineEnumeration(Ultragraph g) : g_(std::move(g)), sets_(1, 0, fib_) {
        if (g_.kind() != "loopline")
            throw std::invalid_argument("loopline enumeration: wrong backend");
    }

    const Ultragraph& graph() const override { return g_; }
    std::string name() const override { return "canonical/loopline-v1"; }

    std::vector<LoopPathEntry> grade_paths(std::uint64_t w) const {
        std::vector<LoopPathEntry> out;
        auto loops = [](std::uint64_t a) {
            return std::vector<std::uint64_t>(a, 0);
        };
        for (std::uint64_t a = 1; a * a + 2 <= w + 1; ++a) {
            if (a * a + 2 == w) out.push_back({loops(a), 1});
            if (a * a + 3 == w) out.push_back({loops(a), 2});
            if (a * a + 1 == w) out.push_back({loops(a), 0});
        }
        for (std::uint64_t l = 2; l * l + 2 <= w; ++l) {
            std::uint64_t j = w - 1 - l * l;
            if (j >= 1 && j <= l - 1) {
                auto es = loops(l - j);
                for (std::uint64_t e = 1; e <= j; ++e) es.push_back(e);
                out.push_back({std::move(es), 0});
            }
        }
        for (std::uint64_t l = 1; l * l + 1 + l <= w; ++l) {
            std::uint64_t j = w - 1 - l * l;
            if (j >= l) {
                std::vector<std::uint64_t> es;
                for (std::uint64_t e = j - l + 1; e <= j; ++e) es.push_back(e);
                out.push_back({std::move(es), 0});
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    Nat grade_size(std::uint64_t w) const {
        return sets_.count(w) + grade_paths(w).size();
    }

    Nat cum(std::uint64_t w) const {
        std::lock_guard<std::mutex> lk(mu_);
        if (cum_.empty()) cum_.push_back(0);
        while (cum_.size() <= w) cum_.push_back(cum_.back() + grade_size(cum_.size()));
        return cum_[w];
    }

    std::pair<std::uint64_t, int> weight_of(const Ultrapath& p, const CanonSet& canon) const {
        std::uint64_t L = p.alpha.length();
        std::uint64_t maxpos = 0;
        for (auto e : p.alpha.edges) maxpos = std::max(maxpos, e.value + 1);
        const std::uint64_t last = p.alpha.edges.back().value;
        int key;
        std::uint64_t extra;
        if (last == 0) {
            if (canon.finite == std::vector<std::uint64_t>{0, 1}) {
                key = 0;
                extra = 0;
            } else if (canon.finite == std::vector<std::uint64_t>{0}) {
                key = 1;
                extra = 1;
            } else if (canon.finite == std::vector<std::uint64_t>{1}) {
                key = 2;
                extra = 2;
            } else {
                throw std::invalid_argument("rank: bad loop restriction");
            }
        } else {
            if (canon.finite != std::vector<std::uint64_t>{last + 1})
                throw std::invalid_argument("rank: bad line restriction");
            key = 0;
            extra = 0;
        }
        return {L * L + maxpos + extra, key};
    }

    Nat rank(const Ultrapath& p) const override {
        CanonSet canon = g_.canonicalize(p.restriction);
        if (canon.empty()) throw std::invalid_argument("rank: empty restriction");
        if (p.alpha.empty()) {
            auto positions = canon_positions(canon, 1);
            std::uint64_t w = positions.back() + positions.size() - 1;
            return cum(w - 1) + sets_.lex_index(positions, w);
        }
        auto [w, key] = weight_of(p, canon);
        auto entries = grade_paths(w);
        std::vector<std::uint64_t> edges;
        for (auto e : p.alpha.edges) edges.push_back(e.value);
        LoopPathEntry target{std::move(edges), key};
        auto it = std::lower_bound(entries.begin(), entries.end(), target);
        if (it == entries.end() || it->edges != target.edges || it->setkey != target.setkey)
            throw std::logic_error("rank: entry not in its grade");
        return cum(w - 1) + sets_.count(w) + Nat(it - entries.begin()) + 1;
    }

    Ultrapath unrank(const Nat& i) const override {
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
        auto entries = grade_paths(w);
        const auto& ent = entries.at(to_u64(idx - sc - 1));
        FinitePath fp;
        for (auto e : ent.edges) fp.edges.push_back(EdgeId{e});
        SetExpr r = ent.setkey == 0
                        ? SetExpr::range(fp.edges.back())
                        : SetExpr::singleton(VertexId{std::uint64_t(ent.setkey - 1)});
        return Ultrapath{std::move(fp), std::move(r)};
    }

    Nat min_rank_of_length(std::uint64_t n) const override {
        if (n == 0) return 1;
        for (std::uint64_t w = n * n + 1;; ++w) {
            auto entries = grade_paths(w);
            std::uint64_t before = 0;
            for (const auto& e : entries) {
                if (e.edges.size() >= n)
                    return cum(w - 1) + sets_.count(w) + before + 1;
                ++before;
            }
        }
    }

    std::optional<Nat> min_rank_restricted(const FinitePath& alpha,
                                           const SetConstraint& c) const override {
        auto check = [&](const std::vector<std::uint64_t>& values) {
            if (c.must_contain &&
                !std::binary_search(values.begin(), values.end(), c.must_contain->value))
                return false;
            if (c.must_not_contain &&
                std::binary_search(values.begin(), values.end(), c.must_not_contain->value))
                return false;
            auto includes = [&](const CanonSet& s) {
                if (s.includes_a) return false;
                for (auto v : s.finite)
                    if (!std::binary_search(values.begin(), values.end(), v)) return false;
                return true;
            };
            if (c.must_include && !includes(*c.must_include)) return false;
            if (c.must_not_include && includes(*c.must_not_include)) return false;
            return true;
        };
        if (alpha.empty()) {
            auto s = greedy_explicit(c, 0, [](std::uint64_t) { return true; });
            if (!s) return std::nullopt;
            auto positions = *s;
            for (auto& p : positions) ++p;
            std::uint64_t w = positions.back() + positions.size() - 1;
            return cum(w - 1) + sets_.lex_index(positions, w);
        }
        std::optional<Nat> best;
        const std::uint64_t last = alpha.edges.back().value;
        std::vector<std::vector<std::uint64_t>> cands;
        if (last == 0)
            cands = {{0, 1}, {0}, {1}};
        else
            cands = {{last + 1}};
        for (const auto& cand : cands) {
            if (!check(cand)) continue;
            SetExpr r = cand.size() == 1 ? SetExpr::singleton(VertexId{cand[0]})
                                         : SetExpr::range(alpha.edges.back());
            Nat rk = rank(Ultrapath{alpha, r});
            if (!best || rk < *best) best = rk;
        }
        return best;
    }

 private:
    Ultragraph g_;
    FibCache fib_;
    PlainSets sets_;
    mutable std::mutex mu_;
    mutable std::vector<Nat> cum_;
};

// -------------------------------------------------------------- gprime ----

// New ultrapaths of gprime relative to its line part: length-0 sets holding
// v_0, the sets A | F, and paths starting with e_0. Positions shift by one
// (v_0 and e_0 take position 1).
class GonlyIndex {
 public:
    explicit GonlyIndex(const GPrimeLayout& layout, const FibCache& fib)
        : layout_(layout),
          v0tails_(2, 1, fib),
          auf_([this](std::uint64_t p) { return p == 1 || !layout_.in_a(p - 1); },
               [this](std::uint64_t p) { return p == 0 ? 0 : p - layout_.count_a_leq(p - 1); },
               std::nullopt, 1),
          fsets_([this](std::uint64_t p) { return p >= 2 && layout_.in_a(p - 1); },
                 [this](std::uint64_t p) { return p == 0 ? 0 : layout_.count_a_leq(p - 1); },
                 std::nullopt, 0) {}

    static constexpr std::uint64_t kMaxGrade = 5000;

    Nat v0_count(std::uint64_t w) const {
        if (w == 1) return 1;
        return v0tails_.count(w);
    }

    // e_0-run of length l in grade w: edges e_0 e_m .. e_j
    std::optional<std::pair<std::uint64_t, std::uint64_t>> run_at(std::uint64_t w,
                                                                  std::uint64_t l) const {
        if (l < 2 || l * l + 2 > w) return std::nullopt;
        std::uint64_t j = w - 1 - l * l;
        if (j < 1) return std::nullopt;
        std::int64_t m = std::int64_t(j) - std::int64_t(l) + 2;
        if (m < 1) return std::nullopt;
        if (!layout_.in_a(std::uint64_t(m))) return std::nullopt;
        return std::make_pair(std::uint64_t(m), j);
    }

    Nat l1_count(std::uint64_t w) const {  // (e_0, A) token and (e_0, F) sets
        Nat n = w == 2 ? 1 : 0;
        if (w >= 3) n += fsets_.count(w - 2);
        return n;
    }

    Nat run_count(std::uint64_t w) const {
        Nat n = 0;
        for (std::uint64_t l = 2; l * l + 2 <= w; ++l)
            if (run_at(w, l)) ++n;
        return n;
    }

    Nat grade_size(std::uint64_t w) const {
        return v0_count(w) + auf_.count(w) + l1_count(w) + run_count(w);
    }

    Nat cum(std::uint64_t w) const {
        if (w > kMaxGrade) throw std::out_of_range("gprime listing: grade guard exceeded");
        std::lock_guard<std::mutex> lk(mu_);
        if (cum_.empty()) cum_.push_back(0);
        while (cum_.size() <= w) cum_.push_back(cum_.back() + grade_size(cum_.size()));
        return cum_[w];
    }

    const GradedSets& auf() const { return auf_; }
    const GradedSets& fsets() const { return fsets_; }
    const PlainSets& v0tails() const { return v0tails_; }
    const GPrimeLayout& layout() const { return layout_; }

 private:
    const GPrimeLayout& layout_;
    PlainSets v0tails_;
    GradedSets auf_;
    GradedSets fsets_;
    mutable std::mutex mu_;
    mutable std::vector<Nat> cum_;
};

class GPrimeEnumeration final : public Enumeration {
 public:
    GPrimeEnumeration(Ultragraph g, EnumerationPtr base)
        : g_(std::move(g)), base_(std::move(base)) {
        auto* gp = dynamic_cast<const GPrimeBackend*>(&g_.backend());
        if (!gp) throw std::invalid_argument("gprime enumeration: wrong backend");
        gp_ = gp;
        gonly_ = std::make_unique<GonlyIndex>(gp->layout(), fib_);
    }

    const Ultragraph& graph() const override { return g_; }
    std::string name() const override { return "example/gprime-v1"; }

    Nat rank(const Ultrapath& p) const override;
    Ultrapath unrank(const Nat& i) const override;
    Nat min_rank_of_length(std::uint64_t n) const override;
    std::optional<Nat> min_rank_restricted(const FinitePath& alpha,
                                           const SetConstraint& c) const override;

    // base-graph singleton {v_m}: frequent in distance witnesses
    Nat singleton_rank(std::uint64_t m) const {
        Ultrapath up{FinitePath{}, SetExpr::singleton(VertexId{m})};
        return rank(up);
    }

 private:
    Ultragraph g_;
    EnumerationPtr base_;
    const GPrimeBackend* gp_;
    FibCache fib_;
    std::unique_ptr<GonlyIndex> gonly_;

    Nat gonly_rank(const Ultrapath& p, const CanonSet& canon) const;
    Ultrapath gonly_unrank(Nat gi) const;
};

Nat GPrimeEnumeration::gonly_rank(const Ultrapath& p, const CanonSet& canon) const {
    const GonlyIndex& gx = *gonly_;
    if (p.alpha.empty()) {
        if (canon.includes_a) {
            // A | F with F nonempty (A itself is pinned at rank 1)
            auto f = canon_positions(canon, 1);
            std::uint64_t w = f.back() + f.size();
            Nat before = gx.cum(w - 1) + gx.v0_count(w);
            return before + gx.auf().lex_index(f, w);
        }
        // finite set holding v_0: order by the tail past position 1
        auto positions = canon_positions(canon, 1);
        if (positions.size() == 1) return gx.cum(0) + 1;  // {v_0} is grade 1
        std::vector<std::uint64_t> tail(positions.begin() + 1, positions.end());
        std::uint64_t w = positions.back() + positions.size() - 1;
        return gx.cum(w - 1) + gx.v0tails().lex_index(tail, w);
    }
    const std::uint64_t L = p.alpha.length();
    if (L == 1) {
        if (canon.includes_a) return gx.cum(1) + gx.v0_count(2) + gx.auf().count(2) + 1;
        auto f = canon_positions(canon, 1);
        std::uint64_t w = 2 + f.back() + f.size() - 1;
        Nat before = gx.cum(w - 1) + gx.v0_count(w) + gx.auf().count(w) + (w == 2 ? 1 : 0);
        return before + gx.fsets().lex_index(f, w - 2);
    }
    const std::uint64_t j = p.alpha.edges.back().value;
    const std::uint64_t w = L * L + j + 1;
    Nat before = gx.cum(w - 1) + gx.v0_count(w) + gx.auf().count(w) + gx.l1_count(w);
    for (std::uint64_t l = 2; l < L; ++l)
        if (gx.run_at(w, l)) before += 1;
    return before + 1;
}

Ultrapath GPrimeEnumeration::gonly_unrank(Nat gi) const {
    const GonlyIndex& gx = *gonly_;
    std::uint64_t w = 1;
    while (gx.cum(w) < gi) ++w;
    Nat idx = gi - gx.cum(w - 1);
    Nat c = gx.v0_count(w);
    if (idx <= c) {
        std::vector<std::uint64_t> positions{1};
        if (w > 1) {
            auto tail = gx.v0tails().unrank(w, idx);
            positions.insert(positions.end(), tail.begin(), tail.end());
        }
        std::vector<VertexId> vs;
        for (auto p : positions) vs.push_back(VertexId{p - 1});
        return Ultrapath{FinitePath{}, SetExpr::explicit_set(std::move(vs))};
    }
    idx -= c;
    c = gx.auf().count(w);
    if (idx <= c) {
        auto f = gx.auf().unrank(w, idx);
        std::vector<VertexId> vs;
        for (auto p : f) vs.push_back(VertexId{p - 1});
        return Ultrapath{FinitePath{},
                         SetExpr::union_of({gp_->a_expr(),
                                            SetExpr::explicit_set(std::move(vs))})};
    }
    idx -= c;
    if (w == 2) {
        if (idx == 1)
            return Ultrapath{FinitePath{{EdgeId{0}}}, gp_->a_expr()};
        idx -= 1;
    } else if (w >= 3) {
        Nat fc = gx.fsets().count(w - 2);
        if (idx <= fc) {
            auto f = gx.fsets().unrank(w - 2, idx);
            std::vector<VertexId> vs;
            for (auto p : f) vs.push_back(VertexId{p - 1});
            return Ultrapath{FinitePath{{EdgeId{0}}}, SetExpr::explicit_set(std::move(vs))};
        }
        idx -= fc;
    }
    for (std::uint64_t l = 2; l * l + 2 <= w; ++l) {
        auto run = gx.run_at(w, l);
        if (!run) continue;
        if (idx == 1) {
            FinitePath fp{{EdgeId{0}}};
            for (std::uint64_t e = run->first; e <= run->second; ++e)
                fp.edges.push_back(EdgeId{e});
            SetExpr tok = SetExpr::range(fp.edges.back());
            return Ultrapath{std::move(fp), std::move(tok)};
        }
        idx -= 1;
    }
    throw std::logic_error("gonly_unrank: grade exhausted");
}

Nat GPrimeEnumeration::rank(const Ultrapath& p) const {
    CanonSet canon = g_.canonicalize(p.restriction);
    if (canon.empty()) throw std::invalid_argument("rank: empty restriction");
    if (canon.includes_a && canon.finite.empty() && p.alpha.empty()) return 1;
    const bool has_v0 = !canon.finite.empty() && canon.finite.front() == 0;
    const bool gonly = canon.includes_a || has_v0 ||
                       (!p.alpha.empty() && p.alpha.edges.front().value == 0);
    if (gonly) return 2 * gonly_rank(p, canon) + 1;
    return 2 * base_->rank(p);
}

Ultrapath GPrimeEnumeration::unrank(const Nat& i) const {
    if (i < 1) throw std::out_of_range("unrank: ranks start at 1");
    if (i == 1) return Ultrapath{FinitePath{}, gp_->a_expr()};
    if (i % 2 == 0) return base_->unrank(i / 2);
    return gonly_unrank((i - 1) / 2);
}

Nat GPrimeEnumeration::min_rank_of_length(std::uint64_t n) const {
    if (n == 0) return 1;
    const Nat best = 2 * base_->min_rank_of_length(n);
    const GonlyIndex& gx = *gonly_;
    Nat gidx;
    if (n == 1) {
        // (e_0, A) in grade 2
        gidx = gx.cum(1) + gx.v0_count(2) + gx.auf().count(2) + 1;
    } else {
        // v_1 is in A (k_1 >= 1), so the length-n run e_0 e_1..e_{n-1} sits
        // in grade n^2 + n and no longer entry appears earlier
        const std::uint64_t w = n * n + n;
        Nat before = gx.cum(w - 1) + gx.v0_count(w) + gx.auf().count(w) + gx.l1_count(w);
        for (std::uint64_t l = 2; l < n; ++l)
            if (gx.run_at(w, l)) before += 1;
        gidx = before + 1;
    }
    return std::min(best, Nat(2 * gidx + 1));
}

std::optional<Nat> GPrimeEnumeration::min_rank_restricted(const FinitePath& alpha,
                                                          const SetConstraint& c) const {
    CanonSet acanon{true, {}};
    auto satisfies = [&](const CanonSet& cand) {
        auto contains = [&](std::uint64_t v) {
            if (cand.includes_a && gp_->layout().in_a(v)) return true;
            return std::binary_search(cand.finite.begin(), cand.finite.end(), v);
        };
        if (c.must_contain && !contains(c.must_contain->value)) return false;
        if (c.must_not_contain && contains(c.must_not_contain->value)) return false;
        auto includes = [&](const CanonSet& s) { return g_.canon_subset(s, cand); };
        if (c.must_include && !includes(*c.must_include)) return false;
        if (c.must_not_include && includes(*c.must_not_include)) return false;
        return true;
    };
    auto try_rank = [&](const Ultrapath& up, std::optional<Nat>& best) {
        Nat r = rank(up);
        if (!best || r < *best) best = r;
    };

    std::optional<Nat> best;
    if (alpha.empty()) {
        // A itself
        if (satisfies(acanon)) best = 1;
        // plain base set
        if (auto s = greedy_explicit(c, 1, [](std::uint64_t) { return true; })) {
            std::vector<VertexId> vs;
            for (auto v : *s) vs.push_back(VertexId{v});
            try_rank(Ultrapath{FinitePath{}, SetExpr::explicit_set(std::move(vs))}, best);
        }
        // v_0-set: v_0 plus whatever the positive clauses demand
        {
            SetConstraint cc = c;
            std::vector<std::uint64_t> s{0};
            bool ok = true;
            if (cc.must_include) {
                if (cc.must_include->includes_a) ok = false;
                else
                    s.insert(s.end(), cc.must_include->finite.begin(),
                             cc.must_include->finite.end());
            }
            if (ok && cc.must_contain) s.push_back(cc.must_contain->value);
            if (ok) {
                std::sort(s.begin(), s.end());
                s.erase(std::unique(s.begin(), s.end()), s.end());
                CanonSet cand{false, s};
                if (satisfies(cand)) {
                    std::vector<VertexId> vs;
                    for (auto v : s) vs.push_back(VertexId{v});
                    try_rank(Ultrapath{FinitePath{}, SetExpr::explicit_set(std::move(vs))},
                             best);
                }
            }
        }
        // A | F with F the non-A part of the positive clauses
        {
            std::vector<std::uint64_t> f;
            bool ok = true;
            if (c.must_include) {
                for (auto v : c.must_include->finite)
                    if (!gp_->layout().in_a(v)) f.push_back(v);
            }
            if (c.must_contain && !gp_->layout().in_a(c.must_contain->value))
                f.push_back(c.must_contain->value);
            std::sort(f.begin(), f.end());
            f.erase(std::unique(f.begin(), f.end()), f.end());
            if (f.empty()) ok = false;  // plain A already tried
            CanonSet cand{true, f};
            if (ok && satisfies(cand)) {
                std::vector<VertexId> vs;
                for (auto v : f) vs.push_back(VertexId{v});
                try_rank(Ultrapath{FinitePath{},
                                   SetExpr::union_of({gp_->a_expr(),
                                                      SetExpr::explicit_set(std::move(vs))})},
                         best);
            }
        }
        return best;
    }

    const bool starts_e0 = alpha.edges.front().value == 0;
    if (starts_e0 && alpha.length() == 1) {
        if (satisfies(acanon)) try_rank(Ultrapath{alpha, gp_->a_expr()}, best);
        // explicit F inside A
        std::vector<std::uint64_t> s;
        bool ok = true;
        if (c.must_include) {
            if (c.must_include->includes_a) ok = false;
            else
                s = c.must_include->finite;
        }
        if (ok && c.must_contain) s.push_back(c.must_contain->value);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        for (auto v : s)
            if (!gp_->layout().in_a(v)) ok = false;
        if (ok && s.empty()) {
            // least member of A
            s.push_back(gp_->layout().block_start(1));
        }
        if (ok) {
            CanonSet cand{false, s};
            if (satisfies(cand)) {
                std::vector<VertexId> vs;
                for (auto v : s) vs.push_back(VertexId{v});
                try_rank(Ultrapath{alpha, SetExpr::explicit_set(std::move(vs))}, best);
            }
        }
        return best;
    }

    // token-only tails
    const std::uint64_t tok = alpha.edges.back().value + 1;
    CanonSet cand{false, {tok}};
    if (!satisfies(cand)) return std::nullopt;
    return rank(Ultrapath{alpha, SetExpr::range(alpha.edges.back())});
}

}  // namespace

EnumerationPtr line_enumeration(const Ultragraph& g) {
    return std::make_shared<LineEnumeration>(g);
}

EnumerationPtr loopline_enumeration(const Ultragraph& g) {
    return std::make_shared<LooplineEnumeration>(g);
}

EnumerationPtr example_enumeration(const Ultragraph& gprime, EnumerationPtr base) {
    return std::make_shared<GPrimeEnumeration>(gprime, std::move(base));
}

}  // namespace ultrashift
