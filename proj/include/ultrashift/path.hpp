#pragma once

#include "ultrashift/ultragraph.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>

namespace ultrashift {

class NotComposable : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// (alpha, A) with A inside r(alpha); a length-0 ultrapath is its set.
struct Ultrapath {
    FinitePath alpha;
    SetExpr restriction;

    std::size_t length() const { return alpha.length(); }
};

Ultrapath make_ultrapath(const Ultragraph& g, FinitePath alpha, SetExpr restriction);
// Embeds a finite path as (alpha, r(last edge)).
Ultrapath embed_path(const Ultragraph& g, FinitePath alpha);
bool ultrapath_equal(const Ultragraph& g, const Ultrapath& a, const Ultrapath& b);
SetExpr canon_to_expr(const Ultragraph& g, const CanonSet& c);

struct BitRun {
    Nat begin;  // [begin, end)
    Nat end;
    int value = 0;
};

// Deterministic positional 0/1 oracle. Streams that know their maximal
// constant runs expose them for the aggregated sweep engines.
class BitStream {
 public:
    int at(const Nat& i) const;
    const std::string& provenance() const { return impl_->name; }
    bool has_runs() const { return static_cast<bool>(impl_->runs); }
    BitRun run_at(const Nat& i) const;

    static BitStream constant(int v);
    static BitStream from_function(std::string name, std::function<int(const Nat&)> fn);
    static BitStream from_runs(std::string name, std::function<int(const Nat&)> fn,
                               std::function<BitRun(const Nat&)> runs);
    static BitStream hashed(std::uint64_t seed);

 private:
    struct Impl {
        std::string name;
        std::function<int(const Nat&)> fn;
        std::function<BitRun(const Nat&)> runs;
    };
    std::shared_ptr<const Impl> impl_;
    explicit BitStream(std::shared_ptr<const Impl> i) : impl_(std::move(i)) {}
};

struct EvPeriodicRep {
    std::vector<EdgeId> prefix;
    std::vector<EdgeId> cycle;
};

struct CycleCodedRep {
    std::vector<EdgeId> c0;
    std::vector<EdgeId> c1;
    BitStream bits;
    VertexId base;
};

struct RuleRep {
    std::string name;
    std::function<EdgeId(const Nat&)> fn;
    std::uint64_t param = 0;
};

// Positional edge oracle, never materialized. Shifts re-index in O(1).
class InfinitePath {
 public:
    static InfinitePath eventually_periodic(const Ultragraph& g, std::vector<EdgeId> prefix,
                                            std::vector<EdgeId> cycle);
    static InfinitePath cycle_coded(const Ultragraph& g, std::vector<EdgeId> c0,
                                    std::vector<EdgeId> c1, BitStream bits);
    static InfinitePath rule_based(const Ultragraph& g, RuleRep rep);

    EdgeId at(const Nat& i) const;  // 0-based, validates the queried prefix
    InfinitePath advanced(const Nat& k) const;
    const Nat& offset() const { return offset_; }
    const Ultragraph& graph() const;

    const EvPeriodicRep* as_periodic() const;
    const CycleCodedRep* as_cycle_coded() const;
    const RuleRep* as_rule() const;

    // Canonical (transient, primitive cycle) view with the offset applied.
    EvPeriodicRep canonical_periodic() const;

 private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    Nat offset_ = 0;
};

class XPoint {
 public:
    enum class Kind { Infinite, FinPair, Zero };

    static XPoint infinite(InfinitePath p);
    static XPoint fin_pair(const Ultragraph& g, Ultrapath up);
    static XPoint zero(const Ultragraph& g, SetExpr a);

    Kind kind() const { return kind_; }
    const Ultragraph& graph() const { return graph_; }
    const InfinitePath& path() const;
    const Ultrapath& pair() const;
    const SetExpr& zero_set() const;

    // Edge at position i (0-based); nullopt past the end of a finite point.
    std::optional<EdgeId> edge_at(const Nat& i) const;
    bool is_infinite() const { return kind_ == Kind::Infinite; }

 private:
    XPoint(Ultragraph g, Kind k) : graph_(std::move(g)), kind_(k) {}
    Ultragraph graph_;
    Kind kind_;
    std::optional<InfinitePath> inf_;
    std::optional<Ultrapath> fin_;
    std::optional<SetExpr> zero_;
};

XPoint shift(const XPoint& x);
XPoint shift_k(const XPoint& x, const Nat& k);

Ultrapath concat(const Ultragraph& g, const Ultrapath& x, const Ultrapath& y);

bool is_initial_segment(const Ultrapath& p, const XPoint& x);

// Structural equality where decidable (same kind of representation).
bool definitely_equal(const XPoint& x, const XPoint& y);
// First position where the edge streams differ, scanning at most `bound`
// positions; nullopt when none was found.
std::optional<Nat> first_disagreement(const XPoint& x, const XPoint& y, const Nat& bound);

struct ConvergenceVerdict {
    bool converges = false;
    bool finite_horizon = true;  // always a horizon-limited verdict
};

// Finite-horizon convergence check for a sequence seq(0..len-1) against the
// limit; prefix criterion for infinite limits, escaping-emitter criterion
// for finite ones (sampling initial segments F of the emitter set).
ConvergenceVerdict converges_to(const std::function<XPoint(std::uint64_t)>& seq,
                                std::uint64_t len, const XPoint& limit,
                                std::uint64_t horizon);

}  // namespace ultrashift
