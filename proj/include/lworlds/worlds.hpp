#pragma once

// Ensembles of world-line copies ("lives") carrying fixed records through
// source, measurement and meeting events.

#include "lworlds/hilbert.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lw::worlds {

using hilbert::StateVector;
using Json = nlohmann::json;

struct SystemSpec {
    std::string id;
    double x0 = 0.0;
    /// When present, every event of the system must sit on x0 + v t.
    std::optional<double> v;
};

enum class EventKind { Source, Measurement, Meeting };

std::string to_string(EventKind k);

struct EventNode {
    std::string id;
    EventKind kind = EventKind::Source;
    double t = 0.0;
    double x = 0.0;
    /// Source and meeting participants.
    std::vector<std::string> participants;
    /// Measurement payload.
    std::string system;
    std::string measurer;
    std::string setting;  ///< "X", "XZ:45", or "random:X|Y"
    /// Source payload: a named state or explicit amplitudes over `participants`.
    std::string state_name;
    std::vector<hilbert::complex> amplitudes;

    /// Systems whose world lines pass through this event.
    std::vector<std::string> involved() const;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<SystemSpec> systems;
    std::vector<EventNode> events;
    std::size_t n = 1000;
    std::uint64_t seed = 1;

    static Scenario from_json(const Json& j);
    /// Throws ParseError on unreadable or malformed files.
    static Scenario load(const std::string& path);
    Json to_json() const;

    /// Throws ValidationError naming the offending events.
    void validate() const;

    const EventNode& event(const std::string& id) const;
    const SystemSpec& system(const std::string& id) const;
    /// Events sorted by (t, id): the processing order.
    std::vector<const EventNode*> ordered_events() const;
    /// Hex digest of the canonical serialization.
    std::string digest() const;
};

/// Named source states: "epr", "source_x", "singlet", "ghz", "up_z", "down_z", "up_x".
StateVector named_state(const std::string& name, const std::vector<std::string>& labels);
/// The source event's state over its participants.
StateVector source_state(const EventNode& source);

/// Short hex digest of a byte string.
std::string hex_digest(const std::string& bytes);

struct Record {
    StateVector state;
    /// Sorted event ids the record reflects.
    std::vector<std::string> provenance;
    std::string digest;

    Json to_json() const;
};

using RecordPtr = std::shared_ptr<const Record>;

struct LogEntry {
    std::string event;
    std::string setting;
    int value = +1;
};

/// Event id -> outcome value, own or learned at meetings.
using Knowledge = std::map<std::string, int>;

struct Life {
    std::string system;
    std::size_t copy = 0;
    RecordPtr record;
    std::vector<LogEntry> log;
    Knowledge knowledge;
};

struct StatRow {
    std::string event;
    std::string kind;
    std::string key;      ///< measurer, or "M_A|M_B" at meetings
    std::string outcome;  ///< "+1", or "+1|-1" at meetings
    std::size_t count = 0;
    double fraction = 0.0;
};

/// Product of the known outcomes over the lives paired at a meeting.
struct MeetingSummary {
    std::string event;
    std::string settings;  ///< "XXX"
    std::vector<std::string> events;
    std::map<int, std::size_t> products;
    std::size_t groups = 0;

    std::string to_string() const;
};

struct RunResult {
    Scenario scenario;
    /// Measurement event id -> setting actually used.
    std::map<std::string, std::string> settings;
    /// Measurement event id -> pointer label.
    std::map<std::string, std::string> pointers;
    std::vector<Json> trace;
    std::vector<StatRow> stats;
    std::vector<MeetingSummary> summaries;
    std::map<std::string, std::vector<Life>> lives;

    std::string trace_text() const;
    std::string stats_csv() const;
    const Life& life(const std::string& system, std::size_t copy) const;
};

/// Pointer label of each measurement: the measurer id, then "<id>#2", ...
std::map<std::string, std::string> pointer_labels(const Scenario& s);

/// Resolves "random:..." settings with the scenario seed.
std::map<std::string, std::string> resolve_settings(const Scenario& s);

RunResult run_scenario(const Scenario& s);

/// Value the life would certainly observe measuring `observable` on `label`,
/// conditioned on its own knowledge; none when uncertain or label absent.
/// `pointers` maps measurement events to pointer labels (RunResult::pointers).
std::optional<int> predict_with_certainty(const Life& life, const std::map<std::string, std::string>& pointers,
                                          const hilbert::Label& label, const hilbert::Observable& observable);

/// Largest-remainder apportionment of `total` over `weights` (normalized
/// internally); ties go to the earlier entry.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

}  // namespace lw::worlds
