#pragma once

#include "ultrashift/path.hpp"

#include <memory>

namespace ultrashift {

// Constraint on the restriction set of an ultrapath with a fixed path part.
// All present clauses must hold; inclusion clauses are canonical sets.
struct SetConstraint {
    std::optional<VertexId> must_contain;
    std::optional<VertexId> must_not_contain;
    std::optional<CanonSet> must_include;      // B superset of this
    std::optional<CanonSet> must_not_include;  // B not a superset of this

    static SetConstraint contains(VertexId v) {
        SetConstraint c;
        c.must_contain = v;
        return c;
    }
};

// A listing p_1, p_2, ... of every ultrapath of the graph. Ranks start at 1,
// grow without bound in path length and in max edge index, and the first
// rank reachable by paths of a given length is computable by grade
// arithmetic. The listing fixes the metric; outputs must name it.
class Enumeration {
 public:
    virtual ~Enumeration() = default;

    virtual const Ultragraph& graph() const = 0;
    virtual std::string name() const = 0;

    virtual Nat rank(const Ultrapath& p) const = 0;
    virtual Ultrapath unrank(const Nat& i) const = 0;
    virtual Nat min_rank_of_length(std::uint64_t n) const = 0;

    // Least rank among ultrapaths (alpha, B) with this exact path part and
    // B satisfying the constraint; nullopt when no admissible B exists.
    virtual std::optional<Nat> min_rank_restricted(const FinitePath& alpha,
                                                   const SetConstraint& c) const = 0;
};

using EnumerationPtr = std::shared_ptr<const Enumeration>;

// Default enumeration for the backend kind; the choice of listing is a fixed,
// documented convention (weight |alpha|^2 + max edge position + set weight,
// graded, then (|alpha|, edge list, set key) within a grade).
EnumerationPtr canonical_enumeration(const Ultragraph& g);

// The gprime listing keeping every base-graph ultrapath at twice its base
// rank, with A first and the new ultrapaths interleaved at odd positions.
EnumerationPtr example_enumeration(const Ultragraph& gprime, EnumerationPtr base);

EnumerationPtr finite_enumeration(const Ultragraph& g);
EnumerationPtr line_enumeration(const Ultragraph& g);
EnumerationPtr loopline_enumeration(const Ultragraph& g);

}  // namespace ultrashift
