#pragma once

// Exhaustive searches over deterministic, world-indexed and multivalued
// hidden-variable tables for a correlation spec.

#include "lworlds/correlations.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lw::hv {

using correlations::CorrelationSpec;

struct OutcomeEntry {
    int value = +1;
    std::optional<std::string> world;

    bool operator==(const OutcomeEntry&) const = default;
};

/// Values carried by one (party, setting) pair.
struct AssignmentCell {
    std::string party;
    std::string setting;
    std::vector<OutcomeEntry> entries;

    bool operator==(const AssignmentCell&) const = default;
};

/// Cells are party-major, settings in alphabet order.
struct Assignment {
    std::vector<AssignmentCell> cells;

    const AssignmentCell& at(const std::string& party, const std::string& setting) const;
    std::vector<int> values(const std::string& party, const std::string& setting) const;
    /// "A.X=+1 A.Y=-1 ..." or "A.X=(+1^w1,-1^w2) ..." or "A.X={+1,-1} ...".
    std::string to_string() const;

    bool operator==(const Assignment&) const = default;
};

enum class TraceStatus { Contradiction, Consistent, NoChain };

struct TraceStep {
    std::string variable;    ///< "λ_X^C"
    std::string expression;  ///< "-lm"
    std::string text;        ///< full human-readable line
    std::optional<std::size_t> constraint;  ///< citation into spec.constraints
};

struct ContradictionTrace {
    TraceStatus status = TraceStatus::NoChain;
    std::vector<TraceStep> steps;
    std::string conclusion;

    std::string to_string() const;
};

/// Per-world products of one constraint over candidates satisfying all others.
struct ClosingProducts {
    std::size_t constraint = 0;
    std::uint64_t candidates = 0;
    /// observed[w] holds the distinct product values seen in world w.
    std::vector<std::vector<int>> observed;
};

/// Outcome combinations a multivalued witness realizes for one constraint.
struct Pairing {
    std::size_t constraint = 0;
    std::vector<std::vector<int>> combinations;
};

inline constexpr std::size_t kWitnessLimit = 1000;
inline constexpr std::size_t kMaxSingleWorldPairs = 20;
inline constexpr std::size_t kMaxDivergentBits = 32;
inline constexpr std::size_t kMaxMultivaluedPairs = 12;

struct SearchReport {
    bool satisfiable = false;
    std::vector<Assignment> witnesses;  ///< truncated to kWitnessLimit
    std::uint64_t witness_count = 0;
    std::uint64_t total_searched = 0;
    std::optional<ContradictionTrace> trace;
    std::vector<std::string> world_tags;
    std::optional<ClosingProducts> closing;
    std::vector<Pairing> pairings;

    bool truncated() const { return witness_count > witnesses.size(); }
};

/// Enumerates the half-open index range [begin, end) of single-world tables.
/// Bit k of an index is the value of pair k (party-major), set bit = -1.
SearchReport enumerate_single_world_range(const CorrelationSpec& spec, std::uint64_t begin, std::uint64_t end);
/// Combines reports of adjacent ranges; `left` must cover the lower indices.
SearchReport merge(SearchReport left, const SearchReport& right);

SearchReport enumerate_single_world(const CorrelationSpec& spec);

ContradictionTrace derive_contradiction_trace(const CorrelationSpec& spec);

enum class WorldMatching {
    /// World tags are the satisfying outcome combinations of the anchor constraint.
    Anchor,
    /// Every pair's world vector is free.
    Unanchored,
};

struct DivergentOptions {
    WorldMatching matching = WorldMatching::Anchor;
    std::size_t anchor = 0;
    /// Constraint whose per-world products are recorded; defaults to the last.
    std::optional<std::size_t> closing;
};

SearchReport enumerate_divergent_worlds(const CorrelationSpec& spec, std::size_t world_count,
                                        const DivergentOptions& options = {});

/// Outcome combinations of constraint `index` satisfying it, +1 first.
std::vector<std::vector<int>> satisfying_combinations(const CorrelationSpec& spec, std::size_t index);

struct MultivaluedOptions {
    /// Pairs appearing in a constraint between two or more parties must carry both values.
    bool require_uncertain_marginals = true;
};

SearchReport many_worlds_witness(const CorrelationSpec& spec, const MultivaluedOptions& options = {});

/// S = ab + ab' + a'b - a'b' for a deterministic strategy.
int chsh_strategy_value(int a, int a_prime, int b, int b_prime);
double chsh_classical_bound();

}  // namespace lw::hv
