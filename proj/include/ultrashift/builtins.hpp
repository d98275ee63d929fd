#pragma once

#include "ultrashift/ultragraph.hpp"

#include <map>
#include <mutex>

namespace ultrashift {

struct FiniteEdge {
    VertexId source;
    SetExpr range;
};

class FiniteBackend : public GraphBackend {
 public:
    FiniteBackend(std::uint64_t nv, std::vector<FiniteEdge> edges, std::string label);

    bool finite_universe() const override { return true; }
    std::uint64_t vertex_count() const override { return nv_; }
    bool vertex_exists(VertexId v) const override { return v.value < nv_; }
    bool finite_edges() const override { return true; }
    std::uint64_t edge_count() const override { return edges_.size(); }
    bool edge_exists(EdgeId e) const override { return e.value < edges_.size(); }
    VertexId source(EdgeId e) const override { return edges_.at(e.value).source; }
    const SetExpr& range(EdgeId e) const override { return edges_.at(e.value).range; }
    std::vector<SetExpr> declared_mie() const override { return {}; }
    std::string kind() const override { return "finite"; }
    std::string describe() const override { return label_; }

    // Normalized range as a sorted vertex list.
    const std::vector<std::uint64_t>& range_verts(EdgeId e) const {
        return range_verts_.at(e.value);
    }

 private:
    std::uint64_t nv_;
    std::vector<FiniteEdge> edges_;
    std::vector<std::vector<std::uint64_t>> range_verts_;
    std::string label_;
};

// The one-way line graph: vertices v_1, v_2, ..., edges e_n from v_n into
// {v_{n+1}}.
class LineBackend : public GraphBackend {
 public:
    LineBackend();
    bool finite_universe() const override { return false; }
    std::uint64_t vertex_count() const override { return 0; }
    bool vertex_exists(VertexId v) const override { return v.value >= 1; }
    bool finite_edges() const override { return false; }
    std::uint64_t edge_count() const override { return 0; }
    bool edge_exists(EdgeId e) const override { return e.value >= 1; }
    VertexId source(EdgeId e) const override { return VertexId{e.value}; }
    const SetExpr& range(EdgeId e) const override;
    std::vector<SetExpr> declared_mie() const override { return {}; }
    std::string kind() const override { return "line"; }
    std::string describe() const override { return "line"; }

 private:
    mutable std::mutex mu_;
    mutable std::map<std::uint64_t, SetExpr> range_cache_;
};

// Loop g based at u with r(g) = {u, v_1}, glued to the line graph. Carries a
// periodic point and rays that visit every edge once.
class LooplineBackend : public GraphBackend {
 public:
    LooplineBackend();
    bool finite_universe() const override { return false; }
    std::uint64_t vertex_count() const override { return 0; }
    bool vertex_exists(VertexId) const override { return true; }
    bool finite_edges() const override { return false; }
    std::uint64_t edge_count() const override { return 0; }
    bool edge_exists(EdgeId) const override { return true; }
    VertexId source(EdgeId e) const override { return VertexId{e.value}; }
    const SetExpr& range(EdgeId e) const override;
    std::vector<SetExpr> declared_mie() const override { return {}; }
    std::string kind() const override { return "loopline"; }
    std::string describe() const override { return "loopline"; }

 private:
    SetExpr loop_range_;
    mutable std::mutex mu_;
    mutable std::map<std::uint64_t, SetExpr> range_cache_;
};

// Block sequences k_n, l_n (n >= 1) driving the gprime family.
struct KLProvider {
    std::string name;
    std::function<Nat(std::uint64_t)> k;
    std::function<Nat(std::uint64_t)> l;
};

// Vertex blocks V_n of the emitter set A: V_1 = {v_1..v_{k_1}},
// V_n = {v_{t_n+1}..v_{t_n+k_n}} with t_n = sum_{i<n}(k_i + l_i).
class GPrimeLayout {
 public:
    explicit GPrimeLayout(KLProvider kl);

    bool in_a(std::uint64_t m) const;               // v_m in A, m >= 1
    std::uint64_t count_a_leq(std::uint64_t m) const;  // #(A cap [1, m])
    std::uint64_t block_start(std::size_t n) const;    // t_n + 1, n >= 1
    std::uint64_t block_len(std::size_t n) const;      // k_n
    std::uint64_t blocks_covering(std::uint64_t m) const;  // blocks laid out
    const KLProvider& kl() const { return kl_; }

 private:
    void extend_to(std::uint64_t m) const;
    KLProvider kl_;
    mutable std::mutex mu_;
    mutable std::vector<std::uint64_t> starts_;   // block_start(n), 1-based
    mutable std::vector<std::uint64_t> lens_;     // k_n
    mutable std::vector<std::uint64_t> a_prefix_; // #A-members in blocks 1..n
    mutable std::uint64_t covered_ = 0;           // layout laid out through v_covered_
};

// The gprime ultragraph: the line graph plus v_0 and e_0 with r(e_0) = A.
class GPrimeBackend : public GraphBackend {
 public:
    explicit GPrimeBackend(KLProvider kl);

    bool finite_universe() const override { return false; }
    std::uint64_t vertex_count() const override { return 0; }
    bool vertex_exists(VertexId) const override { return true; }
    bool finite_edges() const override { return false; }
    std::uint64_t edge_count() const override { return 0; }
    bool edge_exists(EdgeId) const override { return true; }
    VertexId source(EdgeId e) const override { return VertexId{e.value}; }
    const SetExpr& range(EdgeId e) const override;
    std::vector<SetExpr> declared_mie() const override { return {a_expr_}; }
    std::string kind() const override { return "gprime"; }
    std::string describe() const override;
    bool in_declared_a(std::uint64_t v) const override { return layout_->in_a(v); }

    const GPrimeLayout& layout() const { return *layout_; }
    const SetExpr& a_expr() const { return a_expr_; }

 private:
    std::shared_ptr<const GPrimeLayout> layout_;
    SetExpr a_expr_;
    mutable std::mutex mu_;
    mutable std::map<std::uint64_t, SetExpr> range_cache_;
};

Ultragraph make_single_loop();
Ultragraph make_rose2();
Ultragraph make_cycle(std::uint64_t n);
Ultragraph make_finite(std::uint64_t nv, std::vector<FiniteEdge> edges,
                       std::string label = "finite");
Ultragraph make_line();
Ultragraph make_loopline();
Ultragraph make_gprime(KLProvider kl);
Ultragraph make_gprime_linear(std::uint64_t a = 1, std::uint64_t b = 0);  // k_n = l_n = a*n + b

// Lookup by builtin name used by the CLI ("rose2", "loop1", "cycle3",
// "line", "loopline", "gprime" with k_n = l_n = n).
std::optional<Ultragraph> builtin_graph(const std::string& name);

}  // namespace ultrashift
