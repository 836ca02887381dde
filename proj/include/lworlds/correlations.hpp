#pragma once

// Canonical entangled states and perfect-correlation specifications.

#include "lworlds/hilbert.hpp"

#include <string>
#include <vector>

namespace lw::correlations {

/// One setting per party and the required product of the +-1 outcomes.
struct Constraint {
    std::vector<std::string> settings;
    int product = +1;

    bool operator==(const Constraint&) const = default;
};

struct CorrelationSpec {
    std::vector<std::string> parties;
    /// Subsystem label each party measures; defaults to the party name.
    std::vector<std::string> subsystems;
    /// Setting alphabet per party; defaults to the settings used in constraints.
    std::vector<std::vector<std::string>> settings;
    std::vector<Constraint> constraints;

    /// Fills defaulted fields and checks invariants. Throws DomainError.
    void normalize();
    /// Throws DomainError when an invariant is broken.
    void validate() const;

    std::size_t party_index(const std::string& party) const;
    std::size_t setting_index(std::size_t party, const std::string& setting) const;
    /// "XXX" for single-letter settings, "XZ:0,XZ:45" otherwise.
    static std::string settings_string(const std::vector<std::string>& settings);
    /// "XXX=-1"
    static std::string describe(const Constraint& c);
    /// Inverse of describe() for `parties` settings: "XXX=-1", "XZ:0,XZ:45=+1".
    static Constraint parse_constraint(const std::string& text, std::size_t parties);

    /// JSON spec file: {"parties": [...], "subsystems": [...], "settings": [[...]],
    /// "constraints": ["XXX=-1", ...]}. Throws ParseError.
    static CorrelationSpec parse(const std::string& text);
    static CorrelationSpec load(const std::string& path);
};

/// Parties A, B, C on spins a, b, c; settings {X, Y};
/// XXX = -1, YYX = +1, XYY = +1, YXY = +1.
CorrelationSpec ghz_spec();
/// Parties A, B on spins a, b; ZZ = +1.
CorrelationSpec epr_spec();

/// (|up_z up_z> - |down_z down_z>)/sqrt2 on {a, b}.
hilbert::StateVector epr_state();
/// (|up_z up_z up_z> - |down_z down_z down_z>)/sqrt2 on {a, b, c}.
hilbert::StateVector ghz_state();
/// (|01> - |10>)/sqrt2 on {a, b}.
hilbert::StateVector singlet_state();
/// Both parties' records after x measurements of an x-correlated pair:
/// (|up_x>_a|"+1">_A|up_x>_b|"+1">_B + |down_x>_a|"-1">_A|down_x>_b|"-1">_B)/sqrt2.
hilbert::StateVector measured_pair_state();

struct ConstraintResult {
    Constraint constraint;
    double expectation = 0.0;
    /// Born weight on tuples whose product differs from the requirement.
    double violating_probability = 0.0;
    bool satisfied = false;
};

struct CorrelationReport {
    std::vector<ConstraintResult> results;
    bool pass = false;
};

inline constexpr double kExpectationTolerance = 1e-10;
inline constexpr double kSupportTolerance = 1e-12;

CorrelationReport verify_spec(const hilbert::StateVector& psi, const CorrelationSpec& spec);

struct Insufficiency {
    double lhs = 0.0;  ///< product of local traces Tr(rho_L P_L) Tr(rho_R P_R)
    double rhs = 0.0;  ///< joint Born probability |<psi|(phi_L (x) phi_R)>|^2
    double gap = 0.0;
};

/// Compares what the two reduced states predict for a joint outcome with the
/// joint Born probability. `left_outcome`/`right_outcome` are the rank-1
/// projector vectors over the left and right labels.
Insufficiency reduced_state_insufficiency(const hilbert::StateVector& psi,
                                          const std::vector<hilbert::Label>& left,
                                          const std::vector<hilbert::Label>& right,
                                          const hilbert::StateVector& left_outcome,
                                          const hilbert::StateVector& right_outcome);

struct ChshSettings {
    hilbert::Observable a;
    hilbert::Observable a_prime;
    hilbert::Observable b;
    hilbert::Observable b_prime;
};

/// Settings reaching 2 sqrt2 on singlet_state().
ChshSettings tsirelson_settings();

/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b') for a two-qubit state; the first
/// label belongs to the a-settings.
double chsh_value(const hilbert::StateVector& psi, const ChshSettings& settings);

}  // namespace lw::correlations
