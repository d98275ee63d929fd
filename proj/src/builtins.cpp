#include "ultrashift/builtins.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace ultrashift {

FiniteBackend::FiniteBackend(std::uint64_t nv, std::vector<FiniteEdge> edges, std::string label)
    : nv_(nv), edges_(std::move(edges)), label_(std::move(label)) {
    range_verts_.reserve(edges_.size());
    // Normalize every range to an explicit sorted list up front.
    for (const auto& e : edges_) {
        std::vector<std::uint64_t> vs;
        for (std::uint64_t v = 0; v < nv_; ++v) {
            // Evaluate the expression tree without an Ultragraph facade.
            std::function<bool(const SetExpr&)> contains = [&](const SetExpr& s) -> bool {
                switch (s.kind()) {
                    case SetExpr::Kind::Explicit:
                    case SetExpr::Kind::Singleton:
                        return std::binary_search(s.verts().begin(), s.verts().end(), v);
                    case SetExpr::Kind::Range:
                        return contains(edges_.at(s.edge().value).range);
                    case SetExpr::Kind::Union:
                        return std::any_of(s.children().begin(), s.children().end(), contains);
                    case SetExpr::Kind::Intersection:
                        return std::all_of(s.children().begin(), s.children().end(), contains);
                    case SetExpr::Kind::Declared:
                        return s.decl().contains(VertexId{v});
                }
                return false;
            };
            if (contains(e.range)) vs.push_back(v);
        }
        range_verts_.push_back(std::move(vs));
    }
}

LineBackend::LineBackend() = default;

const SetExpr& LineBackend::range(EdgeId e) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = range_cache_.find(e.value);
    if (it == range_cache_.end())
        it = range_cache_.emplace(e.value, SetExpr::singleton(VertexId{e.value + 1})).first;
    return it->second;
}

LooplineBackend::LooplineBackend()
    : loop_range_(SetExpr::explicit_set({VertexId{0}, VertexId{1}})) {}

const SetExpr& LooplineBackend::range(EdgeId e) const {
    if (e.value == 0) return loop_range_;
    std::lock_guard<std::mutex> lk(mu_);
    auto it = range_cache_.find(e.value);
    if (it == range_cache_.end())
        it = range_cache_.emplace(e.value, SetExpr::singleton(VertexId{e.value + 1})).first;
    return it->second;
}

GPrimeLayout::GPrimeLayout(KLProvider kl) : kl_(std::move(kl)) {}

void GPrimeLayout::extend_to(std::uint64_t m) const {
    constexpr std::uint64_t kGuard = std::uint64_t(1) << 62;
    while (covered_ < m) {
        std::size_t n = starts_.size() + 1;
        Nat k = kl_.k(n), l = kl_.l(n);
        if (k < 1 || l < 1) throw std::invalid_argument("gprime: k_n, l_n must be >= 1");
        Nat start = Nat(covered_) + 1;
        Nat next_cov = Nat(covered_) + k + l;
        if (next_cov > kGuard) throw std::overflow_error("gprime layout exceeds vertex guard");
        starts_.push_back(to_u64(start));
        lens_.push_back(to_u64(k));
        std::uint64_t prev = a_prefix_.empty() ? 0 : a_prefix_.back();
        a_prefix_.push_back(prev + to_u64(k));
        covered_ = to_u64(next_cov);
    }
}

bool GPrimeLayout::in_a(std::uint64_t m) const {
    if (m == 0) return false;
    std::lock_guard<std::mutex> lk(mu_);
    extend_to(m);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), m);
    if (it == starts_.begin()) return false;
    std::size_t idx = std::size_t(it - starts_.begin()) - 1;
    return m < starts_[idx] + lens_[idx];
}

std::uint64_t GPrimeLayout::count_a_leq(std::uint64_t m) const {
    if (m == 0) return 0;
    std::lock_guard<std::mutex> lk(mu_);
    extend_to(m);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), m);
    if (it == starts_.begin()) return 0;
    std::size_t idx = std::size_t(it - starts_.begin()) - 1;
    std::uint64_t before = idx == 0 ? 0 : a_prefix_[idx - 1];
    std::uint64_t inside = std::min(m - starts_[idx] + 1, lens_[idx]);
    return before + inside;
}

std::uint64_t GPrimeLayout::block_start(std::size_t n) const {
    std::lock_guard<std::mutex> lk(mu_);
    while (starts_.size() < n) extend_to(covered_ + 1);
    return starts_.at(n - 1);
}

std::uint64_t GPrimeLayout::block_len(std::size_t n) const {
    std::lock_guard<std::mutex> lk(mu_);
    while (starts_.size() < n) extend_to(covered_ + 1);
    return lens_.at(n - 1);
}

std::uint64_t GPrimeLayout::blocks_covering(std::uint64_t m) const {
    std::lock_guard<std::mutex> lk(mu_);
    extend_to(m);
    return starts_.size();
}

GPrimeBackend::GPrimeBackend(KLProvider kl)
    : layout_(std::make_shared<GPrimeLayout>(std::move(kl))),
      a_expr_(SetExpr::declared(std::make_shared<DeclaredSet>(DeclaredSet{
          "A",
          [layout = layout_](VertexId v) { return layout->in_a(v.value); },
          [layout = layout_](std::uint64_t i) {
              // i-th member of A in increasing order
              std::uint64_t lo = 1, hi = 2;
              while (layout->count_a_leq(hi) < i + 1) hi *= 2;
              while (lo < hi) {
                  std::uint64_t mid = lo + (hi - lo) / 2;
                  if (layout->count_a_leq(mid) >= i + 1) hi = mid;
                  else lo = mid + 1;
              }
              return VertexId{lo};
          },
          false}))) {}

const SetExpr& GPrimeBackend::range(EdgeId e) const {
    if (e.value == 0) return a_expr_;
    std::lock_guard<std::mutex> lk(mu_);
    auto it = range_cache_.find(e.value);
    if (it == range_cache_.end())
        it = range_cache_.emplace(e.value, SetExpr::singleton(VertexId{e.value + 1})).first;
    return it->second;
}

std::string GPrimeBackend::describe() const { return "gprime[" + layout_->kl().name + "]"; }

Ultragraph make_single_loop() {
    std::vector<FiniteEdge> es;
    es.push_back({VertexId{0}, SetExpr::singleton(VertexId{0})});
    Ultragraph g(std::make_shared<FiniteBackend>(1, std::move(es), "loop1"));
    g.validate();
    return g;
}

Ultragraph make_rose2() {
    std::vector<FiniteEdge> es;
    es.push_back({VertexId{0}, SetExpr::singleton(VertexId{0})});
    es.push_back({VertexId{0}, SetExpr::singleton(VertexId{0})});
    Ultragraph g(std::make_shared<FiniteBackend>(1, std::move(es), "rose2"));
    g.validate();
    return g;
}

Ultragraph make_cycle(std::uint64_t n) {
    std::vector<FiniteEdge> es;
    for (std::uint64_t i = 0; i < n; ++i)
        es.push_back({VertexId{i}, SetExpr::singleton(VertexId{(i + 1) % n})});
    Ultragraph g(std::make_shared<FiniteBackend>(n, std::move(es), "cycle" + std::to_string(n)));
    g.validate();
    return g;
}

Ultragraph make_finite(std::uint64_t nv, std::vector<FiniteEdge> edges, std::string label) {
    Ultragraph g(std::make_shared<FiniteBackend>(nv, std::move(edges), std::move(label)));
    g.validate();
    return g;
}

Ultragraph make_line() { return Ultragraph(std::make_shared<LineBackend>()); }

Ultragraph make_loopline() { return Ultragraph(std::make_shared<LooplineBackend>()); }

Ultragraph make_gprime(KLProvider kl) {
    Ultragraph g(std::make_shared<GPrimeBackend>(std::move(kl)));
    g.validate(64);
    return g;
}

Ultragraph make_gprime_linear(std::uint64_t a, std::uint64_t b) {
    std::ostringstream name;
    name << "k=l=" << a << "n+" << b;
    return make_gprime(KLProvider{name.str(),
                                  [a, b](std::uint64_t n) { return Nat(a * n + b); },
                                  [a, b](std::uint64_t n) { return Nat(a * n + b); }});
}

std::optional<Ultragraph> builtin_graph(const std::string& name) {
    if (name == "loop1") return make_single_loop();
    if (name == "rose2") return make_rose2();
    if (name == "line") return make_line();
    if (name == "loopline") return make_loopline();
    if (name == "gprime") return make_gprime_linear();
    if (name.rfind("cycle", 0) == 0) {
        std::uint64_t n = std::stoull(name.substr(5));
        if (n >= 1) return make_cycle(n);
    }
    return std::nullopt;
}

}  // namespace ultrashift
