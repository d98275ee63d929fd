#pragma once

#include "ultrashift/nat.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ultrashift {

struct VertexId {
    std::uint64_t value = 0;
    friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

struct EdgeId {
    std::uint64_t value = 0;
    friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

class MembershipUndecidable : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};
class SubsetUndecidable : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// A countable vertex set given by rule rather than extension. `nth` must
// enumerate members in strictly increasing order of vertex value.
struct DeclaredSet {
    std::string name;
    std::function<bool(VertexId)> contains;
    std::function<VertexId(std::uint64_t)> nth;
    bool finite = false;
};

// Element of the graph's set algebra: explicit finite sets, edge ranges,
// finite unions/intersections, or a declared rule-based set.
class SetExpr {
 public:
    enum class Kind { Explicit, Singleton, Range, Union, Intersection, Declared };

    static SetExpr explicit_set(std::vector<VertexId> vs);
    static SetExpr singleton(VertexId v);
    static SetExpr range(EdgeId e);
    static SetExpr union_of(std::vector<SetExpr> kids);
    static SetExpr intersection_of(std::vector<SetExpr> kids);
    static SetExpr declared(std::shared_ptr<const DeclaredSet> d);

    Kind kind() const { return node_->kind; }
    const std::vector<std::uint64_t>& verts() const { return node_->verts; }
    EdgeId edge() const { return EdgeId{node_->edge}; }
    const std::vector<SetExpr>& children() const { return node_->kids; }
    const DeclaredSet& decl() const { return *node_->decl; }
    std::string to_text() const;

 private:
    struct Node {
        Kind kind;
        std::vector<std::uint64_t> verts;  // sorted, Explicit/Singleton
        std::uint64_t edge = 0;
        std::vector<SetExpr> kids;
        std::shared_ptr<const DeclaredSet> decl;
    };
    std::shared_ptr<const Node> node_;
    explicit SetExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

// Canonical evaluated form of a SetExpr. The only infinite set a shipped
// backend declares is the emitter set A of the gprime family; everything
// else reduces to a finite sorted list. `finite` is kept disjoint from A
// when includes_a is set.
struct CanonSet {
    bool includes_a = false;
    std::vector<std::uint64_t> finite;

    bool empty() const { return !includes_a && finite.empty(); }
    friend bool operator==(const CanonSet&, const CanonSet&) = default;
};

struct FinitePath {
    std::vector<EdgeId> edges;

    std::size_t length() const { return edges.size(); }
    bool empty() const { return edges.empty(); }
    friend bool operator==(const FinitePath&, const FinitePath&) = default;
};

struct OutEdges {
    std::vector<EdgeId> edges;
    bool truncated = false;  // rule-based scan stopped at the horizon
};

class GraphBackend {
 public:
    virtual ~GraphBackend() = default;

    virtual bool finite_universe() const = 0;
    virtual std::uint64_t vertex_count() const = 0;  // finite universes only
    virtual bool vertex_exists(VertexId v) const = 0;
    virtual bool finite_edges() const = 0;
    virtual std::uint64_t edge_count() const = 0;    // finite edge sets only
    virtual bool edge_exists(EdgeId e) const = 0;
    virtual VertexId source(EdgeId e) const = 0;
    virtual const SetExpr& range(EdgeId e) const = 0;
    virtual std::vector<SetExpr> declared_mie() const = 0;
    virtual std::string kind() const = 0;
    virtual std::string describe() const = 0;
    // Membership in the backend's one declared infinite set, if any.
    virtual bool in_declared_a(std::uint64_t /*vertex*/) const { return false; }
};

// Immutable ultragraph; all queries are pure and safe to share across threads.
class Ultragraph {
 public:
    explicit Ultragraph(std::shared_ptr<const GraphBackend> b);

    const GraphBackend& backend() const { return *backend_; }
    bool finite_universe() const { return backend_->finite_universe(); }
    std::uint64_t vertex_count() const { return backend_->vertex_count(); }
    bool finite_edges() const { return backend_->finite_edges(); }
    std::uint64_t edge_count() const { return backend_->edge_count(); }
    bool vertex_exists(VertexId v) const { return backend_->vertex_exists(v); }
    bool edge_exists(EdgeId e) const { return backend_->edge_exists(e); }
    VertexId source(EdgeId e) const;
    const SetExpr& range(EdgeId e) const;
    std::string kind() const { return backend_->kind(); }
    std::string describe() const { return backend_->describe(); }

    bool set_contains(const SetExpr& s, VertexId v) const;
    CanonSet canonicalize(const SetExpr& s) const;
    bool set_nonempty(const SetExpr& s) const;
    bool set_equal(const SetExpr& a, const SetExpr& b) const;
    bool set_subset(const SetExpr& a, const SetExpr& b) const;
    bool canon_subset(const CanonSet& a, const CanonSet& b) const;

    OutEdges out_edges(const SetExpr& a, std::uint64_t horizon) const;
    bool edge_follows(EdgeId e, EdgeId f) const;
    bool is_valid_path(const FinitePath& p) const;

    // Declared minimal infinite emitters contained in r(alpha); empty for
    // finite ultragraphs. The set overload serves length-0 paths.
    std::vector<SetExpr> minimal_infinite_emitters(const FinitePath& alpha) const;
    std::vector<SetExpr> minimal_infinite_emitters_in(const SetExpr& r) const;

    // Construction-time contract checks: nonempty ranges, no sinks
    // (sampled window for rule-based universes), declared emitters emit.
    void validate(std::uint64_t sample_window = 10000) const;

 private:
    std::shared_ptr<const GraphBackend> backend_;
};

}  // namespace ultrashift
