#include "ultrashift/path.hpp"

#include <algorithm>
#include <cassert>

namespace ultrashift {

Ultrapath make_ultrapath(const Ultragraph& g, FinitePath alpha, SetExpr restriction) {
    if (!g.set_nonempty(restriction))
        throw std::invalid_argument("ultrapath: empty restriction");
    if (!alpha.empty()) {
        if (!g.is_valid_path(alpha)) throw std::invalid_argument("ultrapath: invalid path");
        if (!g.set_subset(restriction, g.range(alpha.edges.back())))
            throw std::invalid_argument("ultrapath: restriction escapes the final range");
    }
    return Ultrapath{std::move(alpha), std::move(restriction)};
}

Ultrapath embed_path(const Ultragraph& g, FinitePath alpha) {
    if (alpha.empty()) throw std::invalid_argument("embed_path: length-0");
    if (!g.is_valid_path(alpha)) throw std::invalid_argument("embed_path: invalid path");
    SetExpr r = SetExpr::range(alpha.edges.back());
    return Ultrapath{std::move(alpha), std::move(r)};
}

bool ultrapath_equal(const Ultragraph& g, const Ultrapath& a, const Ultrapath& b) {
    return a.alpha == b.alpha && g.set_equal(a.restriction, b.restriction);
}

SetExpr canon_to_expr(const Ultragraph& g, const CanonSet& c) {
    if (c.empty()) throw std::invalid_argument("canon_to_expr: empty set");
    std::vector<VertexId> vs;
    vs.reserve(c.finite.size());
    for (auto v : c.finite) vs.push_back(VertexId{v});
    if (!c.includes_a) return SetExpr::explicit_set(std::move(vs));
    auto mies = g.backend().declared_mie();
    if (mies.empty()) throw std::logic_error("canon_to_expr: A without a declared emitter");
    if (vs.empty()) return mies.front();
    return SetExpr::union_of({mies.front(), SetExpr::explicit_set(std::move(vs))});
}

// ---- bit streams ----

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

int BitStream::at(const Nat& i) const { return impl_->fn(i); }

BitRun BitStream::run_at(const Nat& i) const {
    if (!impl_->runs) throw std::logic_error("BitStream: no run support");
    return impl_->runs(i);
}

BitStream BitStream::constant(int v) {
    auto impl = std::make_shared<Impl>();
    impl->name = v ? "ones" : "zeros";
    impl->fn = [v](const Nat&) { return v; };
    // the unbounded run is reported with a bound far past any usable horizon
    impl->runs = [v](const Nat&) { return BitRun{0, pow2(512), v}; };
    return BitStream(std::move(impl));
}

BitStream BitStream::from_function(std::string name, std::function<int(const Nat&)> fn) {
    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->fn = std::move(fn);
    return BitStream(std::move(impl));
}

BitStream BitStream::from_runs(std::string name, std::function<int(const Nat&)> fn,
                               std::function<BitRun(const Nat&)> runs) {
    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->fn = std::move(fn);
    impl->runs = std::move(runs);
    return BitStream(std::move(impl));
}

BitStream BitStream::hashed(std::uint64_t seed) {
    auto impl = std::make_shared<Impl>();
    impl->name = "hashed:" + std::to_string(seed);
    impl->fn = [seed](const Nat& i) {
        std::uint64_t low = (i & Nat(~std::uint64_t(0))).convert_to<std::uint64_t>();
        std::uint64_t hi = i == 0 ? 0 : msb_index(i);
        return int(splitmix64(seed ^ splitmix64(low + 0x1000 * hi)) & 1);
    };
    return BitStream(std::move(impl));
}

// ---- infinite paths ----

struct InfinitePath::Impl {
    Ultragraph graph;
    std::variant<EvPeriodicRep, CycleCodedRep, RuleRep> rep;

    // Rule-based validation high-water mark; representation kinds with
    // finitely many transitions are validated eagerly at construction.
    std::mutex mu;
    Nat validated = 0;

    // Cycle-coded block boundaries when |c0| != |c1|: cum[b] = first edge
    // position of block b.
    std::vector<Nat> cum;

    Impl(Ultragraph g, std::variant<EvPeriodicRep, CycleCodedRep, RuleRep> r)
        : graph(std::move(g)), rep(std::move(r)) {}

    EdgeId raw_at(const Nat& p) {
        if (auto* ev = std::get_if<EvPeriodicRep>(&rep)) {
            Nat plen = ev->prefix.size();
            if (p < plen) return ev->prefix[to_u64(p)];
            Nat q = (p - plen) % ev->cycle.size();
            return ev->cycle[to_u64(q)];
        }
        if (auto* cc = std::get_if<CycleCodedRep>(&rep)) {
            std::size_t u = cc->c0.size(), w = cc->c1.size();
            if (u == w) {
                Nat b = p / u;
                std::uint64_t off = to_u64(p % u);
                return (cc->bits.at(b) ? cc->c1 : cc->c0)[off];
            }
            std::lock_guard<std::mutex> lk(mu);
            if (cum.empty()) cum.push_back(0);
            while (cum.back() <= p) {
                Nat b = Nat(cum.size()) - 1;
                cum.push_back(cum.back() + (cc->bits.at(b) ? w : u));
            }
            auto it = std::upper_bound(cum.begin(), cum.end(), p);
            std::size_t b = std::size_t(it - cum.begin()) - 1;
            std::uint64_t off = to_u64(p - cum[b]);
            return (cc->bits.at(b) ? cc->c1 : cc->c0)[off];
        }
        return std::get<RuleRep>(rep).fn(p);
    }

    void validate_to(const Nat& p) {
        if (!std::holds_alternative<RuleRep>(rep)) return;
        std::lock_guard<std::mutex> lk(mu);
        while (validated <= p) {
            EdgeId e = raw_at(validated);
            if (!graph.edge_exists(e))
                throw std::invalid_argument("infinite path: no such edge at index " +
                                            validated.str());
            if (validated > 0 && !graph.edge_follows(raw_at(validated - 1), e))
                throw std::invalid_argument("infinite path: broken transition at index " +
                                            validated.str());
            ++validated;
        }
    }
};

InfinitePath InfinitePath::eventually_periodic(const Ultragraph& g, std::vector<EdgeId> prefix,
                                               std::vector<EdgeId> cycle) {
    if (cycle.empty()) throw std::invalid_argument("eventually_periodic: empty cycle");
    FinitePath all{prefix};
    all.edges.insert(all.edges.end(), cycle.begin(), cycle.end());
    if (!g.is_valid_path(all))
        throw std::invalid_argument("eventually_periodic: invalid transitions");
    if (!g.edge_follows(cycle.back(), cycle.front()))
        throw std::invalid_argument("eventually_periodic: cycle does not close");
    InfinitePath p;
    p.impl_ = std::make_shared<Impl>(
        g, EvPeriodicRep{std::move(prefix), std::move(cycle)});
    return p;
}

InfinitePath InfinitePath::cycle_coded(const Ultragraph& g, std::vector<EdgeId> c0,
                                       std::vector<EdgeId> c1, BitStream bits) {
    if (c0.empty() || c1.empty()) throw std::invalid_argument("cycle_coded: empty loop");
    if (c0 == c1) throw std::invalid_argument("cycle_coded: loops must differ");
    FinitePath p0{c0}, p1{c1};
    if (!g.is_valid_path(p0) || !g.is_valid_path(p1))
        throw std::invalid_argument("cycle_coded: invalid loop");
    VertexId v = g.source(c0.front());
    if (g.source(c1.front()) != v)
        throw std::invalid_argument("cycle_coded: loops based at different vertices");
    for (const auto& c : {c0, c1})
        if (!g.set_contains(g.range(c.back()), v))
            throw std::invalid_argument("cycle_coded: loop does not return to its base");
    InfinitePath p;
    p.impl_ = std::make_shared<Impl>(
        g, CycleCodedRep{std::move(c0), std::move(c1), std::move(bits), v});
    return p;
}

InfinitePath InfinitePath::rule_based(const Ultragraph& g, RuleRep rep) {
    InfinitePath p;
    p.impl_ = std::make_shared<Impl>(g, std::move(rep));
    p.impl_->validate_to(0);
    return p;
}

EdgeId InfinitePath::at(const Nat& i) const {
    Nat p = offset_ + i;
    impl_->validate_to(p);
    return impl_->raw_at(p);
}

InfinitePath InfinitePath::advanced(const Nat& k) const {
    InfinitePath p = *this;
    p.offset_ += k;
    return p;
}

const Ultragraph& InfinitePath::graph() const { return impl_->graph; }

const EvPeriodicRep* InfinitePath::as_periodic() const {
    return std::get_if<EvPeriodicRep>(&impl_->rep);
}
const CycleCodedRep* InfinitePath::as_cycle_coded() const {
    return std::get_if<CycleCodedRep>(&impl_->rep);
}
const RuleRep* InfinitePath::as_rule() const { return std::get_if<RuleRep>(&impl_->rep); }

EvPeriodicRep InfinitePath::canonical_periodic() const {
    const auto* ev = as_periodic();
    if (!ev) throw std::logic_error("canonical_periodic: not eventually periodic");
    EvPeriodicRep r = *ev;
    // apply the offset
    Nat off = offset_;
    if (off >= r.prefix.size()) {
        Nat k = off - r.prefix.size();
        std::size_t rot = to_u64(k % r.cycle.size());
        std::rotate(r.prefix.begin(), r.prefix.begin(), r.prefix.end());
        r.prefix.clear();
        std::rotate(r.cycle.begin(), r.cycle.begin() + rot, r.cycle.end());
    } else {
        r.prefix.erase(r.prefix.begin(), r.prefix.begin() + to_u64(off));
    }
    // primitive cycle
    std::size_t n = r.cycle.size();
    for (std::size_t d = 1; d <= n; ++d) {
        if (n % d) continue;
        bool ok = true;
        for (std::size_t i = d; i < n && ok; ++i)
            if (r.cycle[i] != r.cycle[i % d]) ok = false;
        if (ok) {
            r.cycle.resize(d);
            break;
        }
    }
    // minimal transient
    while (!r.prefix.empty() && r.prefix.back() == r.cycle.back()) {
        r.prefix.pop_back();
        std::rotate(r.cycle.begin(), r.cycle.end() - 1, r.cycle.end());
    }
    return r;
}

// ---- points ----

XPoint XPoint::infinite(InfinitePath p) {
    XPoint x(p.graph(), Kind::Infinite);
    x.inf_ = std::move(p);
    return x;
}

XPoint XPoint::fin_pair(const Ultragraph& g, Ultrapath up) {
    if (up.alpha.empty())
        throw std::invalid_argument("fin_pair: length-0 pairs are Zero points");
    auto mies = g.minimal_infinite_emitters(up.alpha);
    bool ok = false;
    for (const auto& m : mies)
        if (g.set_equal(m, up.restriction)) ok = true;
    if (!ok)
        throw std::invalid_argument("fin_pair: restriction is not a minimal infinite emitter");
    XPoint x(g, Kind::FinPair);
    x.fin_ = std::move(up);
    return x;
}

XPoint XPoint::zero(const Ultragraph& g, SetExpr a) {
    bool ok = false;
    for (const auto& m : g.backend().declared_mie())
        if (g.set_equal(m, a)) ok = true;
    if (!ok) throw std::invalid_argument("zero: set is not a declared minimal infinite emitter");
    XPoint x(g, Kind::Zero);
    x.zero_ = std::move(a);
    return x;
}

const InfinitePath& XPoint::path() const {
    if (!inf_) throw std::logic_error("XPoint: not infinite");
    return *inf_;
}
const Ultrapath& XPoint::pair() const {
    if (!fin_) throw std::logic_error("XPoint: not a finite pair");
    return *fin_;
}
const SetExpr& XPoint::zero_set() const {
    if (!zero_) throw std::logic_error("XPoint: not a zero point");
    return *zero_;
}

std::optional<EdgeId> XPoint::edge_at(const Nat& i) const {
    switch (kind_) {
        case Kind::Infinite:
            return path().at(i);
        case Kind::FinPair:
            if (i < fin_->alpha.length()) return fin_->alpha.edges[to_u64(i)];
            return std::nullopt;
        case Kind::Zero:
            return std::nullopt;
    }
    return std::nullopt;
}

XPoint shift(const XPoint& x) { return shift_k(x, 1); }

XPoint shift_k(const XPoint& x, const Nat& k) {
    if (k == 0) return x;
    switch (x.kind()) {
        case XPoint::Kind::Infinite:
            return XPoint::infinite(x.path().advanced(k));
        case XPoint::Kind::FinPair: {
            const Ultrapath& up = x.pair();
            Nat n = up.alpha.length();
            if (k >= n) return XPoint::zero(x.graph(), up.restriction);
            FinitePath rest;
            rest.edges.assign(up.alpha.edges.begin() + to_u64(k), up.alpha.edges.end());
            return XPoint::fin_pair(x.graph(),
                                    Ultrapath{std::move(rest), up.restriction});
        }
        case XPoint::Kind::Zero:
            return x;
    }
    throw std::logic_error("shift_k: bad kind");
}

Ultrapath concat(const Ultragraph& g, const Ultrapath& x, const Ultrapath& y) {
    const bool xe = x.alpha.empty(), ye = y.alpha.empty();
    if (!xe && !ye) {
        // (alpha, A) . (beta, B) = (alpha beta, B) when s(beta) lands in A
        if (!g.set_contains(x.restriction, g.source(y.alpha.edges.front())))
            throw NotComposable("concat: s(y) outside r(x)");
        FinitePath joined = x.alpha;
        joined.edges.insert(joined.edges.end(), y.alpha.edges.begin(), y.alpha.edges.end());
        return Ultrapath{std::move(joined), y.restriction};
    }
    if (xe && ye) {
        CanonSet cx = g.canonicalize(x.restriction), cy = g.canonicalize(y.restriction);
        CanonSet meet;
        meet.includes_a = cx.includes_a && cy.includes_a;
        for (auto v : cx.finite)
            if (std::binary_search(cy.finite.begin(), cy.finite.end(), v) ||
                (cy.includes_a && g.backend().in_declared_a(v)))
                meet.finite.push_back(v);
        for (auto v : cy.finite)
            if (cx.includes_a && g.backend().in_declared_a(v)) meet.finite.push_back(v);
        std::sort(meet.finite.begin(), meet.finite.end());
        meet.finite.erase(std::unique(meet.finite.begin(), meet.finite.end()),
                          meet.finite.end());
        if (meet.empty()) throw NotComposable("concat: empty intersection");
        return Ultrapath{FinitePath{}, canon_to_expr(g, meet)};
    }
    if (xe) {
        if (!g.set_contains(x.restriction, g.source(y.alpha.edges.front())))
            throw NotComposable("concat: s(y) outside the set");
        return y;
    }
    // x has length >= 1, y is a set: (alpha, A) . y = (alpha, A cap y)
    CanonSet ca = g.canonicalize(x.restriction), cy = g.canonicalize(y.restriction);
    CanonSet meet;
    meet.includes_a = ca.includes_a && cy.includes_a;
    for (auto v : ca.finite)
        if (std::binary_search(cy.finite.begin(), cy.finite.end(), v) ||
            (cy.includes_a && g.backend().in_declared_a(v)))
            meet.finite.push_back(v);
    for (auto v : cy.finite)
        if (ca.includes_a && g.backend().in_declared_a(v)) meet.finite.push_back(v);
    std::sort(meet.finite.begin(), meet.finite.end());
    meet.finite.erase(std::unique(meet.finite.begin(), meet.finite.end()), meet.finite.end());
    if (meet.empty()) throw NotComposable("concat: r(x) misses y");
    return Ultrapath{x.alpha, canon_to_expr(g, meet)};
}

bool is_initial_segment(const Ultrapath& p, const XPoint& x) {
    const Ultragraph& g = x.graph();
    const std::size_t j = p.length();
    if (j == 0) {
        switch (x.kind()) {
            case XPoint::Kind::Infinite:
                return g.set_contains(p.restriction, g.source(x.path().at(0)));
            case XPoint::Kind::FinPair:
                return g.set_contains(p.restriction, g.source(x.pair().alpha.edges.front()));
            case XPoint::Kind::Zero:
                return g.set_subset(x.zero_set(), p.restriction);
        }
    }
    switch (x.kind()) {
        case XPoint::Kind::Infinite: {
            for (std::size_t i = 0; i < j; ++i)
                if (x.path().at(i) != p.alpha.edges[i]) return false;
            return g.set_contains(p.restriction, g.source(x.path().at(j)));
        }
        case XPoint::Kind::FinPair: {
            const Ultrapath& q = x.pair();
            const std::size_t n = q.length();
            if (j > n) return false;
            for (std::size_t i = 0; i < j; ++i)
                if (q.alpha.edges[i] != p.alpha.edges[i]) return false;
            if (j < n) return g.set_contains(p.restriction, g.source(q.alpha.edges[j]));
            return g.set_subset(q.restriction, p.restriction);
        }
        case XPoint::Kind::Zero:
            return false;
    }
    return false;
}

bool definitely_equal(const XPoint& x, const XPoint& y) {
    if (x.kind() != y.kind()) return false;
    const Ultragraph& g = x.graph();
    switch (x.kind()) {
        case XPoint::Kind::Zero:
            return g.set_equal(x.zero_set(), y.zero_set());
        case XPoint::Kind::FinPair:
            return x.pair().alpha == y.pair().alpha &&
                   g.set_equal(x.pair().restriction, y.pair().restriction);
        case XPoint::Kind::Infinite: {
            const auto &a = x.path(), &b = y.path();
            if (a.as_periodic() && b.as_periodic()) {
                auto ca = a.canonical_periodic(), cb = b.canonical_periodic();
                return ca.prefix == cb.prefix && ca.cycle == cb.cycle;
            }
            if (a.as_cycle_coded() && b.as_cycle_coded()) {
                const auto *ra = a.as_cycle_coded(), *rb = b.as_cycle_coded();
                return ra->c0 == rb->c0 && ra->c1 == rb->c1 &&
                       ra->bits.provenance() == rb->bits.provenance() &&
                       a.offset() == b.offset();
            }
            if (a.as_rule() && b.as_rule())
                return a.as_rule()->name == b.as_rule()->name &&
                       a.as_rule()->param == b.as_rule()->param && a.offset() == b.offset();
            return false;
        }
    }
    return false;
}

std::optional<Nat> first_disagreement(const XPoint& x, const XPoint& y, const Nat& bound) {
    // Eventually periodic pairs settle within transient + lcm of the periods.
    if (x.is_infinite() && y.is_infinite() && x.path().as_periodic() &&
        y.path().as_periodic()) {
        auto ca = x.path().canonical_periodic(), cb = y.path().canonical_periodic();
        Nat t = std::max(ca.prefix.size(), cb.prefix.size());
        Nat l = boost::multiprecision::lcm(Nat(ca.cycle.size()), Nat(cb.cycle.size()));
        Nat stop = std::min(bound, t + l + 1);
        for (Nat i = 0; i < stop; ++i)
            if (x.path().at(i) != y.path().at(i)) return i;
        return std::nullopt;  // provably equal
    }
    for (Nat i = 0; i < bound; ++i) {
        auto a = x.edge_at(i), b = y.edge_at(i);
        if (a.has_value() != b.has_value()) return i;
        if (!a.has_value()) return std::nullopt;  // both finite, streams exhausted
        if (*a != *b) return i;
    }
    return std::nullopt;
}

ConvergenceVerdict converges_to(const std::function<XPoint(std::uint64_t)>& seq,
                                std::uint64_t len, const XPoint& limit,
                                std::uint64_t horizon) {
    ConvergenceVerdict verdict;
    if (len == 0) return verdict;
    const Ultragraph& g = limit.graph();

    auto equal_points = [&](const XPoint& a, const XPoint& b) {
        if (definitely_equal(a, b)) return true;
        if (a.is_infinite() && b.is_infinite())
            return !first_disagreement(a, b, Nat(horizon)).has_value();
        return false;
    };

    if (limit.is_infinite()) {
        const std::uint64_t m_max = std::min<std::uint64_t>(horizon, 64);
        // agreement length of each element against the limit, capped
        std::vector<std::uint64_t> agree(len, 0);
        for (std::uint64_t n = 0; n < len; ++n) {
            XPoint xn = seq(n);
            std::uint64_t a = 0;
            while (a < m_max) {
                auto e = xn.edge_at(a);
                if (!e || *e != limit.path().at(a)) break;
                ++a;
            }
            agree[n] = a;
        }
        // for every M <= m_max some tail must stay at agreement >= M
        std::uint64_t last_bad = 0;
        bool any_bad = false;
        for (std::uint64_t n = 0; n < len; ++n)
            if (agree[n] < m_max) {
                last_bad = n;
                any_bad = true;
            }
        verdict.converges = !any_bad || last_bad + 1 < len;
        return verdict;
    }

    // finite limit (gamma, A) or (A, A)
    const SetExpr& a_set = limit.kind() == XPoint::Kind::Zero ? limit.zero_set()
                                                              : limit.pair().restriction;
    const std::uint64_t l = limit.kind() == XPoint::Kind::Zero
                                ? 0
                                : limit.pair().alpha.length();
    OutEdges emitters = g.out_edges(a_set, horizon);
    for (std::uint64_t fsz : {std::uint64_t(0), std::uint64_t(1), std::uint64_t(2),
                              std::uint64_t(4), std::uint64_t(8)}) {
        if (fsz > emitters.edges.size()) break;
        std::vector<EdgeId> f(emitters.edges.begin(), emitters.edges.begin() + fsz);
        std::uint64_t last_bad = 0;
        bool any_bad = false;
        for (std::uint64_t n = 0; n < len; ++n) {
            XPoint xn = seq(n);
            bool ok = equal_points(xn, limit);
            if (!ok) {
                ok = true;
                for (std::uint64_t i = 0; i < l && ok; ++i) {
                    auto e = xn.edge_at(i);
                    if (!e || *e != limit.pair().alpha.edges[i]) ok = false;
                }
                auto next = xn.edge_at(l);
                if (!next) ok = false;
                if (ok) {
                    if (!g.set_contains(a_set, g.source(*next))) ok = false;
                    for (const auto& fe : f)
                        if (*next == fe) ok = false;
                }
            }
            if (!ok) {
                last_bad = n;
                any_bad = true;
            }
        }
        if (any_bad && last_bad + 1 >= len) {
            verdict.converges = false;
            return verdict;
        }
    }
    verdict.converges = true;
    return verdict;
}

}  // namespace ultrashift
