#pragma once

// Post-hoc checks over serialized traces. Nothing here reads simulator
// state: records are rebuilt from the scenario embedded in the trace.

#include "lworlds/worlds.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lw::audit {

using worlds::Json;

struct Trace {
    Json header;
    std::vector<Json> events;
    worlds::Scenario scenario;

    /// Throws IntegrityError when the text is not a trace.
    static Trace parse(const std::string& text);
    /// Throws ParseError when the file cannot be read.
    static Trace load(const std::string& path);
    static Trace from_run(const worlds::RunResult& run);

    std::string setting(const std::string& event) const;
    const Json& line(const std::string& event) const;
};

struct Check {
    std::string id;       ///< "locality", "record", "outcomes", "pairings", "continuity", "partition"
    std::string subject;  ///< event id, or "a vs b"
    bool pass = true;
    std::string detail;
};

struct AuditReport {
    std::vector<Check> checks;
    bool pass = true;

    void add(Check c);
    /// Failing checks only, or "pass (N checks)".
    std::string to_string() const;
    std::vector<Check> failures() const;
};

/// Rebuilds every post-event record from events in the event's past light
/// cone and compares it bit for bit; checks provenance, outcome proportions
/// and meeting pairings. Throws IntegrityError for traces that cannot be
/// replayed (bad digests, missing records, events out of order).
AuditReport locality_audit(const Trace& trace);
/// Same, after checking that `scenario` is the one the trace embeds.
AuditReport locality_audit(const Trace& trace, const worlds::Scenario& scenario);

/// Compares the local parties' partitions and records at every event outside
/// the changed measurement's future light cone. Throws ComparisonError unless
/// the traces differ in exactly one measurement setting.
AuditReport no_signaling_check(const Trace& a, const Trace& b, const std::vector<std::string>& local_parties);

struct PerfectCorrelation {
    std::vector<std::string> parties;  ///< measurers, in scenario order
    std::vector<std::string> events;
    std::string constraint;            ///< "ZZ=+1"
    std::string meeting;               ///< where it was first seen
    std::optional<std::string> common_cause;

    std::string to_string() const;
};

/// Minimal sets of known outcomes whose product is constant over all lives
/// paired at a meeting, each with the latest event in the intersection of the
/// outcome events' past light cones that all their records reflect.
std::vector<PerfectCorrelation> detect_perfect_correlations(const Trace& trace);

}  // namespace lw::audit
