#include "lworlds/audit.hpp"

#include "lworlds/correlations.hpp"
#include "lworlds/errors.hpp"
#include "lworlds/spacetime.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace lw::audit {

using hilbert::complex;
using hilbert::StateVector;
using worlds::EventKind;
using worlds::EventNode;
using worlds::Knowledge;
using worlds::Scenario;

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr std::size_t kMaxKnownEvents = 16;

spacetime::Event point(const EventNode& e) { return {e.id, e.t, e.x, 0.0, 0.0}; }

bool precedes(const EventNode& a, const EventNode& b) { return spacetime::causally_precedes(point(a), point(b)); }

bool earlier(const EventNode* a, const EventNode* b) { return a->t != b->t ? a->t < b->t : a->id < b->id; }

std::string value_string(int v) { return v > 0 ? "+1" : "-1"; }

std::vector<std::string> options_of(const std::string& setting)
{
    const std::string prefix = "random:";
    if (setting.rfind(prefix, 0) != 0) return {setting};
    std::vector<std::string> out;
    std::stringstream ss(setting.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, '|')) out.push_back(item);
    return out;
}

std::string join_ids(const std::vector<std::string>& ids, const char* sep = ", ")
{
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : sep) + id;
    return out;
}

Json record_json(const StateVector& state, const std::vector<std::string>& provenance)
{
    Json amps = Json::array();
    for (const auto& a : state.amplitudes()) amps.push_back(Json::array({a.real(), a.imag()}));
    return Json{{"labels", state.labels()}, {"amplitudes", std::move(amps)}, {"provenance", provenance}};
}

std::string digest_of(const Json& record) { return worlds::hex_digest(record.dump()); }

/// Pointer label of each measurement, counted per measurer in (t, id) order.
std::map<std::string, std::string> expected_pointers(const Scenario& s)
{
    std::map<std::string, std::string> out;
    std::map<std::string, int> seen;
    for (const auto* e : s.ordered_events()) {
        if (e->kind != EventKind::Measurement) continue;
        const int k = ++seen[e->measurer];
        out[e->id] = k == 1 ? e->measurer : e->measurer + "#" + std::to_string(k);
    }
    return out;
}

/// State obtained from the listed events alone.
StateVector rebuild(const Trace& trace, const std::map<std::string, std::string>& pointers,
                    const std::vector<std::string>& provenance)
{
    std::vector<const EventNode*> ops;
    for (const auto& id : provenance) ops.push_back(&trace.scenario.event(id));
    std::sort(ops.begin(), ops.end(), earlier);
    StateVector state;
    for (const auto* e : ops) {
        if (e->kind == EventKind::Source) {
            state = hilbert::tensor(state, worlds::source_state(*e));
        } else if (e->kind == EventKind::Measurement) {
            const auto& ptr = pointers.at(e->id);
            state = hilbert::tensor(state, StateVector::basis(ptr, 0));
            state = hilbert::apply(
                hilbert::measurement_coupling(e->system, ptr, hilbert::Observable::parse(trace.setting(e->id))),
                state);
        }
    }
    return state;
}

/// Participation chain: an event reflects itself and whatever the involved
/// systems carried in from their previous events.
std::map<std::string, std::set<std::string>> participation_chains(const Scenario& s)
{
    std::map<std::string, std::set<std::string>> carried;
    std::map<std::string, std::set<std::string>> out;
    for (const auto* e : s.ordered_events()) {
        std::set<std::string> chain{e->id};
        for (const auto& sys : e->involved()) chain.insert(carried[sys].begin(), carried[sys].end());
        for (const auto& sys : e->involved()) carried[sys] = chain;
        out[e->id] = std::move(chain);
    }
    return out;
}

std::vector<std::pair<hilbert::Label, int>> pointer_bits(const Knowledge& k,
                                                         const std::map<std::string, std::string>& pointers)
{
    std::vector<std::pair<hilbert::Label, int>> bits;
    for (const auto& [event, value] : k) bits.emplace_back(pointers.at(event), value > 0 ? 0 : 1);
    return bits;
}

std::optional<Knowledge> merge(const std::vector<const Knowledge*>& parts)
{
    Knowledge out;
    for (const auto* k : parts) {
        for (const auto& [event, value] : *k) {
            auto [it, fresh] = out.emplace(event, value);
            if (!fresh && it->second != value) return std::nullopt;
        }
    }
    return out;
}

std::size_t as_index(const Json& j, std::size_t n, const std::string& where)
{
    if (!j.is_number_unsigned() || j.get<std::size_t>() >= n) {
        throw IntegrityError(where + ": copy index out of range");
    }
    return j.get<std::size_t>();
}

/// Walks a trace line by line, tracking each copy's record digest and
/// knowledge from the serialized data.
class Replay {
public:
    explicit Replay(const Trace& t) : n_(t.scenario.n)
    {
        const Json empty = record_json(StateVector(), {});
        empty_digest_ = digest_of(empty);
        for (const auto& sys : t.scenario.systems) {
            digest_[sys.id].assign(n_, empty_digest_);
            knowledge_[sys.id].assign(n_, {});
        }
    }

    const Knowledge& knowledge(const std::string& sys, std::size_t copy) const { return knowledge_.at(sys)[copy]; }
    std::size_t n() const { return n_; }

    /// Expands "lives" runs into per-copy (pre, post) digests.
    std::vector<std::pair<std::string, std::string>> runs(const Json& line, const std::string& sys) const
    {
        const std::string where = "event " + line.at("event").get<std::string>() + ", system " + sys;
        if (!line.at("lives").contains(sys)) throw IntegrityError(where + ": no lives listed");
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& r : line.at("lives").at(sys)) {
            const auto from = r.at("from").get<std::size_t>();
            const auto to = r.at("to").get<std::size_t>();
            if (from != out.size() || to <= from || to > n_) throw IntegrityError(where + ": life runs do not tile");
            for (std::size_t k = from; k < to; ++k) {
                out.emplace_back(r.at("pre").get<std::string>(), r.at("post").get<std::string>());
            }
        }
        if (out.size() != n_) throw IntegrityError(where + ": life runs do not cover every copy");
        for (const auto& [pre, post] : out) {
            for (const auto* d : {&pre, &post}) {
                if (!line.at("records").contains(*d)) throw IntegrityError(where + ": record " + *d + " missing");
            }
        }
        return out;
    }

    /// Continuity failures as (system, copy) descriptions, then advances.
    std::vector<std::string> advance_digests(const Json& line, const std::vector<std::string>& involved)
    {
        std::vector<std::string> broken;
        for (const auto& sys : involved) {
            const auto r = runs(line, sys);
            auto& d = digest_[sys];
            for (std::size_t k = 0; k < n_; ++k) {
                if (r[k].first != d[k]) broken.push_back(sys + "#" + std::to_string(k));
                d[k] = r[k].second;
            }
        }
        return broken;
    }

    /// Per measurer copy outcome value.
    std::vector<int> outcome_values(const Json& line) const
    {
        std::vector<int> value(n_, 0);
        for (int v : {+1, -1}) {
            for (const auto& run : line.at("outcomes").at(value_string(v))) {
                const auto from = run.at(0).get<std::size_t>();
                const auto to = run.at(1).get<std::size_t>();
                if (to > n_ || from >= to) throw IntegrityError("outcome run out of range");
                for (std::size_t k = from; k < to; ++k) {
                    if (value[k] != 0) throw IntegrityError("copy " + std::to_string(k) + " has two outcomes");
                    value[k] = v;
                }
            }
        }
        if (std::count(value.begin(), value.end(), 0) != 0) {
            throw IntegrityError("event " + line.at("event").get<std::string>() + ": copies without outcome");
        }
        return value;
    }

    std::vector<std::vector<std::size_t>> groups(const Json& line, std::size_t width) const
    {
        const std::string where = "event " + line.at("event").get<std::string>();
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::vector<bool>> used(width, std::vector<bool>(n_, false));
        for (const auto& g : line.at("groups")) {
            if (g.size() != width) throw IntegrityError(where + ": group of wrong width");
            std::vector<std::size_t> row;
            for (std::size_t p = 0; p < width; ++p) {
                const auto c = as_index(g[p], n_, where);
                if (used[p][c]) throw IntegrityError(where + ": copy " + std::to_string(c) + " grouped twice");
                used[p][c] = true;
                row.push_back(c);
            }
            out.push_back(std::move(row));
        }
        return out;
    }

    void set_knowledge(const std::string& sys, std::size_t copy, Knowledge k) { knowledge_[sys][copy] = std::move(k); }

private:
    std::size_t n_;
    std::string empty_digest_;
    std::map<std::string, std::vector<std::string>> digest_;
    std::map<std::string, std::vector<Knowledge>> knowledge_;
};

void check_integrity(const Trace& trace)
{
    const auto& h = trace.header;
    if (h.value("scenario_digest", "") != trace.scenario.digest()) {
        throw IntegrityError("scenario digest does not match the embedded scenario");
    }
    if (h.value("n", std::size_t{0}) != trace.scenario.n) throw IntegrityError("header n differs from the scenario");
    if (h.at("pointers").get<std::map<std::string, std::string>>() != expected_pointers(trace.scenario)) {
        throw IntegrityError("pointer labels differ from the scenario's measurement order");
    }
    const auto ordered = trace.scenario.ordered_events();
    if (ordered.size() != trace.events.size()) {
        throw IntegrityError("trace has " + std::to_string(trace.events.size()) + " event lines, scenario has " +
                             std::to_string(ordered.size()) + " events");
    }
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto& line = trace.events[i];
        const auto& e = *ordered[i];
        if (line.value("event", "") != e.id) {
            throw IntegrityError("line " + std::to_string(i + 2) + " is '" + line.value("event", "") +
                                 "', expected '" + e.id + "'");
        }
        if (line.value("kind", "") != worlds::to_string(e.kind)) throw IntegrityError(e.id + ": kind differs");
        if (e.kind == EventKind::Measurement) {
            const auto setting = trace.setting(e.id);
            const auto opts = options_of(e.setting);
            if (std::find(opts.begin(), opts.end(), setting) == opts.end()) {
                throw IntegrityError(e.id + ": setting '" + setting + "' is not an option of '" + e.setting + "'");
            }
            if (line.value("setting", "") != setting) throw IntegrityError(e.id + ": setting differs from header");
        }
        for (const auto& [digest, rec] : line.at("records").items()) {
            if (digest_of(rec) != digest) throw IntegrityError(e.id + ": record " + digest + " fails its digest");
            for (const auto& p : rec.at("provenance")) {
                try {
                    trace.scenario.event(p.get<std::string>());
                } catch (const LookupError&) {
                    throw IntegrityError(e.id + ": record " + digest + " cites unknown event " + p.dump());
                }
            }
        }
    }
}

/// Post digests of the involved systems' lives, deduplicated.
std::set<std::string> post_digests(const Replay& r, const Json& line, const std::vector<std::string>& involved)
{
    std::set<std::string> out;
    for (const auto& sys : involved) {
        for (const auto& [pre, post] : r.runs(line, sys)) out.insert(post);
    }
    return out;
}

bool same_amplitudes(const Json& rec, const StateVector& state)
{
    const auto& amps = rec.at("amplitudes");
    if (amps.size() != state.dimension()) return false;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const complex a{amps[i].at(0).get<double>(), amps[i].at(1).get<double>()};
        if (a != state.amplitudes()[i]) return false;
    }
    return true;
}
}  // namespace

// ---------------------------------------------------------------------------

Trace Trace::parse(const std::string& text)
{
    Trace t;
    std::stringstream ss(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(raw);
        } catch (const nlohmann::json::exception&) {
            throw IntegrityError("line " + std::to_string(lineno) + " is not JSON");
        }
        if (t.header.is_null()) {
            if (j.value("type", "") != "header" || j.value("format", "") != "lworlds-trace/1") {
                throw IntegrityError("first line is not an lworlds-trace/1 header");
            }
            t.header = std::move(j);
        } else {
            if (j.value("type", "") != "event") throw IntegrityError("line " + std::to_string(lineno) + " is not an event");
            t.events.push_back(std::move(j));
        }
    }
    if (t.header.is_null()) throw IntegrityError("empty trace");
    try {
        t.scenario = Scenario::from_json(t.header.at("scenario"));
        t.scenario.validate();
        if (!t.header.at("settings").is_object() || !t.header.at("pointers").is_object()) {
            throw IntegrityError("header lacks settings or pointers");
        }
    } catch (const ParseError& ex) {
        throw IntegrityError(std::string("embedded scenario: ") + ex.what());
    } catch (const ValidationError& ex) {
        throw IntegrityError(std::string("embedded scenario: ") + ex.what());
    } catch (const nlohmann::json::exception& ex) {
        throw IntegrityError(std::string("header: ") + ex.what());
    }
    return t;
}

Trace Trace::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Trace Trace::from_run(const worlds::RunResult& run) { return parse(run.trace_text()); }

std::string Trace::setting(const std::string& event) const
{
    const auto& s = header.at("settings");
    if (!s.contains(event)) throw IntegrityError("no resolved setting for " + event);
    return s.at(event).get<std::string>();
}

const Json& Trace::line(const std::string& event) const
{
    for (const auto& l : events) {
        if (l.value("event", "") == event) return l;
    }
    throw LookupError("trace has no line for '" + event + "'");
}

void AuditReport::add(Check c)
{
    pass = pass && c.pass;
    checks.push_back(std::move(c));
}

std::vector<Check> AuditReport::failures() const
{
    std::vector<Check> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(c);
    }
    return out;
}

std::string AuditReport::to_string() const
{
    if (pass) return "pass (" + std::to_string(checks.size()) + " checks)";
    std::string out;
    for (const auto& c : failures()) {
        out += "FAIL " + c.id + " at " + c.subject + ": " + c.detail + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Locality audit

AuditReport locality_audit(const Trace& trace, const Scenario& scenario)
{
    if (scenario.digest() != trace.scenario.digest()) {
        throw IntegrityError("trace was produced from a different scenario");
    }
    return locality_audit(trace);
}

AuditReport locality_audit(const Trace& trace)
{
    check_integrity(trace);
    const auto& s = trace.scenario;
    const auto pointers = expected_pointers(s);
    const auto chains = participation_chains(s);
    Replay replay(trace);
    AuditReport report;

    const auto ordered = s.ordered_events();
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const EventNode& e = *ordered[i];
        const Json& line = trace.events[i];
        const auto involved = e.involved();

        std::set<std::string> allowed;
        for (const auto& other : s.events) {
            if (precedes(other, e)) allowed.insert(other.id);
        }

        const auto posts = post_digests(replay, line, involved);
        const auto broken = replay.advance_digests(line, involved);
        report.add({"continuity", e.id, broken.empty(),
                    broken.empty() ? "" : std::to_string(broken.size()) + " lives start from a record they did not hold, first " + broken.front()});

        std::vector<std::string> outside;
        for (const auto& d : posts) {
            for (const auto& p : line.at("records").at(d).at("provenance")) {
                const auto id = p.get<std::string>();
                if (!allowed.count(id) && std::find(outside.begin(), outside.end(), id) == outside.end()) {
                    outside.push_back(id);
                }
            }
        }
        report.add({"locality", e.id, outside.empty(),
                    outside.empty() ? "" : "provenance outside past light cone: " + join_ids(outside)});

        std::vector<std::string> expected_prov;
        for (const auto& id : chains.at(e.id)) {
            if (allowed.count(id)) expected_prov.push_back(id);
        }
        const StateVector expected = rebuild(trace, pointers, expected_prov);
        std::vector<std::string> mismatched;
        for (const auto& d : posts) {
            const auto& rec = line.at("records").at(d);
            const bool ok = rec.at("provenance").get<std::vector<std::string>>() == expected_prov &&
                            rec.at("labels").get<std::vector<std::string>>() == expected.labels() &&
                            same_amplitudes(rec, expected);
            if (!ok) mismatched.push_back(d);
        }
        report.add({"record", e.id, mismatched.empty(),
                    mismatched.empty() ? "" : "record mismatch: " + join_ids(mismatched) + " differs from the state rebuilt from " + join_ids(expected_prov)});

        auto prob = [&](const Knowledge& k) { return hilbert::basis_probability(expected, pointer_bits(k, pointers)); };

        if (e.kind == EventKind::Measurement) {
            const auto values = replay.outcome_values(line);
            const auto groups = replay.groups(line, 2);
            if (groups.size() != replay.n()) throw IntegrityError(e.id + ": not every life was paired");
            std::map<Knowledge, std::array<std::size_t, 2>> classes;
            std::vector<std::string> problems;
            std::vector<std::pair<std::vector<std::size_t>, Knowledge>> updates;
            for (const auto& g : groups) {
                const auto k = merge({&replay.knowledge(e.system, g[0]), &replay.knowledge(e.measurer, g[1])});
                if (!k) {
                    problems.push_back("paired copies " + std::to_string(g[0]) + "/" + std::to_string(g[1]) + " disagree");
                    continue;
                }
                ++classes[*k][values[g[1]] > 0 ? 0 : 1];
                Knowledge after = *k;
                after[e.id] = values[g[1]];
                updates.push_back({g, std::move(after)});
            }
            for (const auto& [k, counts] : classes) {
                const double base = prob(k);
                const std::size_t total = counts[0] + counts[1];
                for (int idx = 0; idx < 2; ++idx) {
                    Knowledge with = k;
                    with[e.id] = hilbert::kOutcomes[idx];
                    double p = base > kProbabilityFloor ? prob(with) / base : 0.0;
                    if (p <= kProbabilityFloor) p = 0.0;
                    const double want = static_cast<double>(total) * p;
                    if (p == 0.0 && counts[idx] > 0) {
                        problems.insert(problems.begin(), std::to_string(counts[idx]) + " lives got zero-probability outcome " +
                                           value_string(hilbert::kOutcomes[idx]));
                    } else if (std::abs(static_cast<double>(counts[idx]) - want) >= 1.0) {
                        problems.push_back("class of " + std::to_string(total) + " has " + std::to_string(counts[idx]) +
                                           " lives at " + value_string(hilbert::kOutcomes[idx]) + ", expected " +
                                           std::to_string(want));
                    }
                }
            }
            for (auto& [g, k] : updates) {
                replay.set_knowledge(e.system, g[0], k);
                replay.set_knowledge(e.measurer, g[1], std::move(k));
            }
            report.add({"outcomes", e.id, problems.empty(), problems.empty() ? "" : problems.front()});
        } else if (e.kind == EventKind::Meeting) {
            const auto& parts = e.participants;
            const auto groups = replay.groups(line, parts.size());
            std::vector<std::string> problems;
            if (line.value("residue", std::size_t{0}) != replay.n() - groups.size()) {
                problems.push_back("residue does not match the unpaired lives");
            }
            std::vector<std::pair<std::vector<std::size_t>, Knowledge>> updates;
            for (const auto& g : groups) {
                std::vector<const Knowledge*> ks;
                for (std::size_t p = 0; p < parts.size(); ++p) ks.push_back(&replay.knowledge(parts[p], g[p]));
                const auto k = merge(ks);
                if (!k) {
                    problems.push_back("paired lives disagree on a shared outcome");
                    continue;
                }
                if (prob(*k) <= kProbabilityFloor) {
                    problems.push_back("paired lives hold a zero-probability outcome combination");
                }
                updates.push_back({g, *k});
            }
            for (auto& [g, k] : updates) {
                for (std::size_t p = 0; p < parts.size(); ++p) replay.set_knowledge(parts[p], g[p], k);
            }
            report.add({"pairings", e.id, problems.empty(), problems.empty() ? "" : problems.front()});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// No-signaling

AuditReport no_signaling_check(const Trace& a, const Trace& b, const std::vector<std::string>& local_parties)
{
    auto resolved = [](const Trace& t) {
        Json j = t.scenario.to_json();
        j.erase("seed");
        j.erase("name");
        j.erase("description");
        for (auto& e : j.at("events")) {
            if (e.at("kind") == "measurement") e["setting"] = t.setting(e.at("id").get<std::string>());
        }
        return j;
    };
    const Json ja = resolved(a);
    const Json jb = resolved(b);
    if (ja.at("n") != jb.at("n") || ja.at("systems") != jb.at("systems") ||
        ja.at("events").size() != jb.at("events").size()) {
        throw ComparisonError("traces come from structurally different scenarios");
    }
    std::vector<std::string> changed;
    for (std::size_t i = 0; i < ja.at("events").size(); ++i) {
        Json ea = ja.at("events")[i];
        Json eb = jb.at("events")[i];
        if (ea == eb) continue;
        if (ea.at("kind") != "measurement") throw ComparisonError("event " + ea.value("id", "") + " differs");
        ea.erase("setting");
        eb.erase("setting");
        if (ea != eb) throw ComparisonError("event " + ea.value("id", "") + " differs beyond its setting");
        changed.push_back(ea.at("id").get<std::string>());
    }
    if (changed.size() != 1) {
        throw ComparisonError("traces must differ in exactly one measurement setting, found " +
                              std::to_string(changed.size()));
    }
    for (const auto& p : local_parties) a.scenario.system(p);

    const auto& c = a.scenario.event(changed[0]);
    AuditReport report;
    for (const auto* e : a.scenario.ordered_events()) {
        const auto involved = e->involved();
        std::vector<std::string> local;
        for (const auto& sys : involved) {
            if (std::find(local_parties.begin(), local_parties.end(), sys) != local_parties.end()) local.push_back(sys);
        }
        if (local.empty() || precedes(c, *e)) continue;
        const auto& la = a.line(e->id);
        const auto& lb = b.line(e->id);
        const std::string subject = e->id + " (" + join_ids(local) + ")";
        if (e->kind != EventKind::Source) {
            const bool same = la.value("outcomes", Json()) == lb.value("outcomes", Json()) &&
                              la.at("groups") == lb.at("groups");
            report.add({"partition", subject, same,
                        same ? "" : "outcome partition changed with the setting of " + c.id});
        }
        bool same_records = true;
        for (const auto& sys : local) {
            same_records = same_records && la.at("lives").at(sys) == lb.at("lives").at(sys);
        }
        report.add({"record", subject, same_records, same_records ? "" : "records changed with the setting of " + c.id});
    }
    if (report.checks.empty()) {
        report.add({"partition", "-", true, "no local event lies outside the future of " + c.id});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Perfect correlations

std::string PerfectCorrelation::to_string() const
{
    return join_ids(parties, "") + " " + constraint + " over " + join_ids(events) + " (seen at " + meeting +
           "), common cause: " + common_cause.value_or("none found");
}

std::vector<PerfectCorrelation> detect_perfect_correlations(const Trace& trace)
{
    check_integrity(trace);
    const auto& s = trace.scenario;
    Replay replay(trace);
    std::vector<PerfectCorrelation> out;
    std::set<std::vector<std::string>> seen;

    auto rank = [&](const std::string& id) {
        const auto& m = s.event(id).measurer;
        for (std::size_t i = 0; i < s.systems.size(); ++i) {
            if (s.systems[i].id == m) return i;
        }
        return s.systems.size();
    };

    for (const auto* e : s.ordered_events()) {
        const auto& line = trace.line(e->id);
        if (e->kind == EventKind::Measurement) {
            const auto values = replay.outcome_values(line);
            for (const auto& g : replay.groups(line, 2)) {
                auto k = merge({&replay.knowledge(e->system, g[0]), &replay.knowledge(e->measurer, g[1])});
                if (!k) throw IntegrityError(e->id + ": paired copies disagree");
                (*k)[e->id] = values[g[1]];
                replay.set_knowledge(e->system, g[0], *k);
                replay.set_knowledge(e->measurer, g[1], std::move(*k));
            }
            continue;
        }
        if (e->kind != EventKind::Meeting) continue;

        const auto& parts = e->participants;
        std::vector<Knowledge> merged;
        for (const auto& g : replay.groups(line, parts.size())) {
            std::vector<const Knowledge*> ks;
            for (std::size_t p = 0; p < parts.size(); ++p) ks.push_back(&replay.knowledge(parts[p], g[p]));
            auto k = merge(ks);
            if (!k) throw IntegrityError(e->id + ": paired lives disagree");
            for (std::size_t p = 0; p < parts.size(); ++p) replay.set_knowledge(parts[p], g[p], *k);
            merged.push_back(std::move(*k));
        }
        if (merged.empty()) continue;

        std::vector<std::string> known;
        for (const auto& kv : merged.front()) {
            const bool everywhere = std::all_of(merged.begin(), merged.end(),
                                                [&](const Knowledge& k) { return k.count(kv.first) > 0; });
            if (everywhere) known.push_back(kv.first);
        }
        std::sort(known.begin(), known.end(), [&](const std::string& x, const std::string& y) {
            const auto rx = rank(x), ry = rank(y);
            return rx != ry ? rx < ry : earlier(&s.event(x), &s.event(y));
        });
        if (known.size() > kMaxKnownEvents) {
            throw SizeGuardError(e->id + ": " + std::to_string(known.size()) + " known outcomes exceed the limit of " +
                                 std::to_string(kMaxKnownEvents));
        }

        const std::size_t m = known.size();
        std::vector<std::uint32_t> constant;
        std::vector<std::uint32_t> masks;
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) masks.push_back(mask);
        std::stable_sort(masks.begin(), masks.end(),
                         [](std::uint32_t x, std::uint32_t y) { return std::popcount(x) < std::popcount(y); });
        for (const auto mask : masks) {
            const bool has_constant_part = std::any_of(constant.begin(), constant.end(),
                                                       [&](std::uint32_t c) { return (c & mask) == c; });
            if (has_constant_part) continue;
            auto product = [&](const Knowledge& k) {
                int prod = 1;
                for (std::size_t i = 0; i < m; ++i) {
                    if (mask >> i & 1u) prod *= k.at(known[i]);
                }
                return prod;
            };
            const int first = product(merged.front());
            const bool fixed = std::all_of(merged.begin(), merged.end(),
                                           [&](const Knowledge& k) { return product(k) == first; });
            if (!fixed) continue;
            constant.push_back(mask);
            if (std::popcount(mask) < 2) continue;

            PerfectCorrelation pc;
            std::vector<std::string> settings;
            for (std::size_t i = 0; i < m; ++i) {
                if (!(mask >> i & 1u)) continue;
                pc.events.push_back(known[i]);
                pc.parties.push_back(s.event(known[i]).measurer);
                settings.push_back(trace.setting(known[i]));
            }
            if (!seen.insert(pc.events).second) continue;
            pc.constraint = correlations::CorrelationSpec::settings_string(settings) + "=" + value_string(first);
            pc.meeting = e->id;

            std::vector<std::set<std::string>> provenances;
            for (const auto& id : pc.events) {
                const auto& ml = trace.line(id);
                std::set<std::string> prov;
                for (const auto& [pre, post] : replay.runs(ml, s.event(id).measurer)) {
                    for (const auto& p : ml.at("records").at(post).at("provenance")) prov.insert(p.get<std::string>());
                }
                provenances.push_back(std::move(prov));
            }
            const EventNode* cause = nullptr;
            for (const auto& cand : s.events) {
                if (std::find(pc.events.begin(), pc.events.end(), cand.id) != pc.events.end()) continue;
                bool ok = true;
                for (std::size_t j = 0; j < pc.events.size() && ok; ++j) {
                    ok = precedes(cand, s.event(pc.events[j])) && provenances[j].count(cand.id) > 0;
                }
                if (ok && (!cause || earlier(cause, &cand))) cause = &cand;
            }
            if (cause) pc.common_cause = cause->id;
            out.push_back(std::move(pc));
        }
    }
    return out;
}

}  // namespace lw::audit
