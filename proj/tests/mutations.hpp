#pragma once

// Hand-corrupted traces for the locality audit. Each mutation rewrites one
// record, recomputes its digest and renames it everywhere, so the corrupted
// trace stays internally consistent and only the audit's replay can catch it.

#include "lworlds/hilbert.hpp"
#include "lworlds/worlds.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lw::mutation {

using worlds::Json;

inline std::vector<Json> lines_of(const std::string& text)
{
    std::vector<Json> out;
    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        if (!raw.empty()) out.push_back(Json::parse(raw));
    }
    return out;
}

inline std::string text_of(const std::vector<Json>& lines)
{
    std::string out;
    for (const auto& l : lines) out += l.dump() + "\n";
    return out;
}

inline Json& line_of(std::vector<Json>& lines, const std::string& event)
{
    for (auto& l : lines) {
        if (l.value("event", "") == event) return l;
    }
    throw std::runtime_error("no line " + event);
}

inline hilbert::StateVector state_of(const Json& rec)
{
    std::vector<hilbert::complex> amps;
    for (const auto& a : rec.at("amplitudes")) amps.emplace_back(a[0].get<double>(), a[1].get<double>());
    return hilbert::StateVector(rec.at("labels").get<std::vector<std::string>>(), std::move(amps));
}

inline Json record_of(const hilbert::StateVector& s, std::vector<std::string> provenance)
{
    Json amps = Json::array();
    for (const auto& a : s.amplitudes()) amps.push_back(Json::array({a.real(), a.imag()}));
    std::sort(provenance.begin(), provenance.end());
    return Json{{"labels", s.labels()}, {"amplitudes", std::move(amps)}, {"provenance", std::move(provenance)}};
}

/// The measurer's post record at `event`.
inline std::string post_digest(const Json& line, const std::string& system)
{
    return line.at("lives").at(system).at(0).at("post").get<std::string>();
}

/// Renames record `from` to `to` (with content `rec`) in every line.
inline void replace_record(std::vector<Json>& lines, const std::string& from, const Json& rec)
{
    const std::string to = worlds::hex_digest(rec.dump());
    for (auto& l : lines) {
        if (l.value("type", "") != "event") continue;
        if (l["records"].contains(from)) {
            l["records"].erase(from);
            l["records"][to] = rec;
        }
        for (auto& [sys, runs] : l["lives"].items()) {
            for (auto& r : runs) {
                if (r["pre"] == from) r["pre"] = to;
                if (r["post"] == from) r["post"] = to;
            }
        }
    }
}

/// Record of `victim` with the other measurement `leaked` coupled in.
inline hilbert::StateVector merged_state(const std::vector<Json>& lines, const Json& victim_rec, const std::string& leaked)
{
    const Json& header = lines.front();
    const std::string pointer = header.at("pointers").at(leaked).get<std::string>();
    const auto obs = hilbert::Observable::parse(header.at("settings").at(leaked).get<std::string>());
    std::string system;
    for (const auto& e : header.at("scenario").at("events")) {
        if (e.at("id") == leaked) system = e.at("system").get<std::string>();
    }
    auto s = hilbert::tensor(state_of(victim_rec), hilbert::StateVector::basis(pointer, 0));
    return hilbert::apply(hilbert::measurement_coupling(system, pointer, obs), s);
}

/// `victim`'s record claims `leaked` in its provenance and carries the merged state.
inline std::string leak_provenance(const std::string& trace, const std::string& victim, const std::string& measurer,
                                   const std::string& leaked)
{
    auto lines = lines_of(trace);
    const auto& line = line_of(lines, victim);
    const auto d = post_digest(line, measurer);
    const Json old = line.at("records").at(d);
    auto prov = old.at("provenance").get<std::vector<std::string>>();
    prov.push_back(leaked);
    replace_record(lines, d, record_of(merged_state(lines, old, leaked), prov));
    return text_of(lines);
}

/// `victim`'s record carries the merged state under its honest provenance.
inline std::string leak_state(const std::string& trace, const std::string& victim, const std::string& measurer,
                              const std::string& leaked)
{
    auto lines = lines_of(trace);
    const auto& line = line_of(lines, victim);
    const auto d = post_digest(line, measurer);
    const Json old = line.at("records").at(d);
    replace_record(lines, d, record_of(merged_state(lines, old, leaked), old.at("provenance").get<std::vector<std::string>>()));
    return text_of(lines);
}

struct Fixture {
    std::string file;
    std::string text;
    std::string event;   ///< where the audit must fail
    std::string detail;  ///< substring of the failure detail
};

inline worlds::RunResult small_run(const std::string& scenario_path)
{
    auto s = worlds::Scenario::load(scenario_path);
    s.n = 100;
    return worlds::run_scenario(s);
}

/// Every shipped fixture, regenerated from the scenario corpus.
inline std::vector<Fixture> fixtures(const std::string& source_dir)
{
    const auto epr = small_run(source_dir + "/scenarios/epr.scn").trace_text();
    const auto ghz = small_run(source_dir + "/scenarios/ghz_xxx.scn").trace_text();
    return {
        {"epr_ma_leaks_mb.trace.jsonl", leak_provenance(epr, "M_A", "A", "M_B"), "M_A",
         "provenance outside past light cone: M_B"},
        {"epr_ma_state_leak.trace.jsonl", leak_state(epr, "M_A", "A", "M_B"), "M_A", "record mismatch"},
        {"ghz_mc_leaks_ma.trace.jsonl", leak_provenance(ghz, "M_C", "C", "M_A"), "M_C",
         "provenance outside past light cone: M_A"},
    };
}

}  // namespace lw::mutation
