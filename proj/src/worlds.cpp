#include "lworlds/worlds.hpp"

#include "lworlds/correlations.hpp"
#include "lworlds/errors.hpp"
#include "lworlds/spacetime.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace lw::worlds {

using hilbert::complex;
using hilbert::Observable;

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kPositionTolerance = 1e-9;

EventKind parse_kind(const std::string& s)
{
    if (s == "source") return EventKind::Source;
    if (s == "measurement") return EventKind::Measurement;
    if (s == "meeting") return EventKind::Meeting;
    throw ParseError("unknown event kind '" + s + "'");
}

complex parse_amplitude(const Json& j)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ParseError("amplitude must be a number or [re, im]");
}

Json amplitudes_json(std::span<const complex> amps)
{
    Json out = Json::array();
    for (const auto& a : amps) {
        out.push_back(Json::array({a.real(), a.imag()}));
    }
    return out;
}

std::vector<std::string> setting_options(const std::string& setting)
{
    const std::string prefix = "random:";
    if (setting.rfind(prefix, 0) != 0) {
        return {setting};
    }
    std::vector<std::string> out;
    std::stringstream ss(setting.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, '|')) {
        out.push_back(item);
    }
    return out;
}

spacetime::Event point(const EventNode& e) { return {e.id, e.t, e.x, 0.0, 0.0}; }

std::string value_string(int v) { return v > 0 ? "+1" : "-1"; }

std::string percent(double p)
{
    char buf[32];
    if (std::abs(p - std::round(p)) < 1e-9) {
        std::snprintf(buf, sizeof buf, "%.0f", p);
    } else {
        std::snprintf(buf, sizeof buf, "%.1f", p);
    }
    return buf;
}

}  // namespace

std::string to_string(EventKind k)
{
    switch (k) {
    case EventKind::Source: return "source";
    case EventKind::Measurement: return "measurement";
    case EventKind::Meeting: return "meeting";
    }
    return "?";
}

std::vector<std::string> EventNode::involved() const
{
    if (kind == EventKind::Measurement) {
        return {system, measurer};
    }
    return participants;
}

// ---------------------------------------------------------------------------
// Scenario files

Scenario Scenario::from_json(const Json& j)
{
    try {
        Scenario s;
        s.name = j.value("name", "");
        s.description = j.value("description", "");
        s.n = j.value("n", std::size_t{1000});
        s.seed = j.value("seed", std::uint64_t{1});
        for (const auto& js : j.at("systems")) {
            SystemSpec sys;
            sys.id = js.at("id").get<std::string>();
            sys.x0 = js.value("x", 0.0);
            if (js.contains("v")) {
                sys.v = js.at("v").get<double>();
            }
            s.systems.push_back(std::move(sys));
        }
        for (const auto& je : j.at("events")) {
            EventNode e;
            e.id = je.at("id").get<std::string>();
            e.kind = parse_kind(je.at("kind").get<std::string>());
            e.t = je.at("t").get<double>();
            e.x = je.value("x", 0.0);
            if (je.contains("participants")) {
                e.participants = je.at("participants").get<std::vector<std::string>>();
            }
            if (e.kind == EventKind::Measurement) {
                e.system = je.at("system").get<std::string>();
                e.measurer = je.at("measurer").get<std::string>();
                e.setting = je.at("setting").get<std::string>();
            }
            if (e.kind == EventKind::Source) {
                const auto& st = je.at("state");
                if (st.is_string()) {
                    e.state_name = st.get<std::string>();
                } else {
                    for (const auto& a : st.at("amplitudes")) {
                        e.amplitudes.push_back(parse_amplitude(a));
                    }
                }
            }
            s.events.push_back(std::move(e));
        }
        return s;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("malformed scenario: ") + ex.what());
    }
}

Scenario Scenario::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scenario file '" + path + "'");
    }
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("cannot parse '" + path + "': " + ex.what());
    }
    auto s = from_json(j);
    if (s.name.empty()) {
        const auto slash = path.find_last_of('/');
        auto base = path.substr(slash == std::string::npos ? 0 : slash + 1);
        s.name = base.substr(0, base.find('.'));
    }
    return s;
}

Json Scenario::to_json() const
{
    Json j;
    j["name"] = name;
    if (!description.empty()) {
        j["description"] = description;
    }
    j["n"] = n;
    j["seed"] = seed;
    j["systems"] = Json::array();
    for (const auto& sys : systems) {
        Json js{{"id", sys.id}, {"x", sys.x0}};
        if (sys.v) {
            js["v"] = *sys.v;
        }
        j["systems"].push_back(js);
    }
    j["events"] = Json::array();
    for (const auto& e : events) {
        Json je{{"id", e.id}, {"kind", to_string(e.kind)}, {"t", e.t}, {"x", e.x}};
        if (e.kind == EventKind::Measurement) {
            je["system"] = e.system;
            je["measurer"] = e.measurer;
            je["setting"] = e.setting;
        } else {
            je["participants"] = e.participants;
        }
        if (e.kind == EventKind::Source) {
            if (e.state_name.empty()) {
                je["state"] = Json{{"amplitudes", amplitudes_json(e.amplitudes)}};
            } else {
                je["state"] = e.state_name;
            }
        }
        j["events"].push_back(je);
    }
    return j;
}

const EventNode& Scenario::event(const std::string& id) const
{
    for (const auto& e : events) {
        if (e.id == id) {
            return e;
        }
    }
    throw LookupError("unknown event '" + id + "'");
}

const SystemSpec& Scenario::system(const std::string& id) const
{
    for (const auto& s : systems) {
        if (s.id == id) {
            return s;
        }
    }
    throw LookupError("unknown system '" + id + "'");
}

std::vector<const EventNode*> Scenario::ordered_events() const
{
    std::vector<const EventNode*> out;
    for (const auto& e : events) {
        out.push_back(&e);
    }
    std::sort(out.begin(), out.end(), [](const EventNode* a, const EventNode* b) {
        return a->t != b->t ? a->t < b->t : a->id < b->id;
    });
    return out;
}

std::string Scenario::digest() const { return hex_digest(to_json().dump()); }

void Scenario::validate() const
{
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    if (n == 0) {
        fail("ensemble size must be at least 1");
    }
    std::set<std::string> system_ids;
    for (const auto& s : systems) {
        if (s.id.empty() || !system_ids.insert(s.id).second) {
            fail("duplicate or empty system id '" + s.id + "'");
        }
        if (!std::isfinite(s.x0) || (s.v && !(std::abs(*s.v) < 1.0))) {
            fail("system " + s.id + " needs a finite position and |v| < 1");
        }
    }
    std::set<std::string> event_ids;
    std::set<std::string> measurers, measured, sourced;
    for (const auto& e : events) {
        if (e.id.empty() || !event_ids.insert(e.id).second) {
            fail("duplicate or empty event id '" + e.id + "'");
        }
        if (!std::isfinite(e.t) || !std::isfinite(e.x)) {
            fail("event " + e.id + " has non-finite coordinates");
        }
        const auto involved = e.involved();
        for (const auto& p : involved) {
            if (!system_ids.count(p)) {
                fail("event " + e.id + " refers to unknown system '" + p + "'");
            }
        }
        if (std::set<std::string>(involved.begin(), involved.end()).size() != involved.size()) {
            fail("event " + e.id + " lists a system twice");
        }
        switch (e.kind) {
        case EventKind::Source:
            if (involved.empty()) {
                fail("source " + e.id + " has no participants");
            }
            try {
                source_state(e);
            } catch (const Error& ex) {
                fail("source " + e.id + ": " + ex.what());
            }
            for (const auto& p : involved) {
                if (!sourced.insert(p).second) {
                    fail("system " + p + " takes part in more than one source");
                }
            }
            break;
        case EventKind::Measurement:
            measurers.insert(e.measurer);
            measured.insert(e.system);
            for (const auto& opt : setting_options(e.setting)) {
                try {
                    Observable::parse(opt);
                } catch (const Error& ex) {
                    fail("measurement " + e.id + ": " + ex.what());
                }
            }
            if (setting_options(e.setting).empty()) {
                fail("measurement " + e.id + " has no setting");
            }
            break;
        case EventKind::Meeting:
            if (involved.size() < 2) {
                fail("meeting " + e.id + " needs at least two participants");
            }
            break;
        }
    }
    for (const auto& m : measurers) {
        if (measured.count(m) || sourced.count(m)) {
            fail("measurer " + m + " cannot also be a measured or prepared system");
        }
    }
    for (const auto& m : measured) {
        if (!sourced.count(m)) {
            fail("measured system " + m + " is never prepared by a source");
        }
    }

    // Each system's events must lie along one causal world line.
    const auto order = ordered_events();
    for (const auto& sys : systems) {
        const EventNode* prev = nullptr;
        for (const auto* e : order) {
            const auto inv = e->involved();
            if (std::find(inv.begin(), inv.end(), sys.id) == inv.end()) {
                continue;
            }
            if (sys.v && std::abs(sys.x0 + *sys.v * e->t - e->x) > kPositionTolerance) {
                fail("system " + sys.id + " is not co-located with event " + e->id);
            }
            if (e->kind != EventKind::Source && sourced.count(sys.id) && !prev) {
                fail("system " + sys.id + " takes part in " + e->id + " before its source");
            }
            if (prev) {
                if (e->kind == EventKind::Source) {
                    fail("source " + e->id + " must be the first event of system " + sys.id);
                }
                if (prev->t == e->t) {
                    fail("system " + sys.id + " is at events " + prev->id + " and " + e->id + " at the same time");
                }
                if (!spacetime::causally_precedes(point(*prev), point(*e))) {
                    fail("spacelike dependency between events " + prev->id + " and " + e->id + " (system " +
                         sys.id + ")");
                }
            }
            prev = e;
        }
    }
}

// ---------------------------------------------------------------------------
// States and records

StateVector named_state(const std::string& name, const std::vector<std::string>& labels)
{
    auto relabel = [&](const StateVector& psi) {
        if (psi.qubit_count() != labels.size()) {
            throw DomainError("state '" + name + "' needs " + std::to_string(psi.qubit_count()) + " participants");
        }
        const auto amps = psi.amplitudes();
        return StateVector(labels, std::vector<complex>(amps.begin(), amps.end()));
    };
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "epr") return relabel(correlations::epr_state());
    if (name == "ghz") return relabel(correlations::ghz_state());
    if (name == "singlet") return relabel(correlations::singlet_state());
    if (name == "source_x") return relabel(StateVector({"a", "b"}, {r, 0.0, 0.0, r}));
    if (name == "up_z") return relabel(StateVector::basis("a", 0));
    if (name == "down_z") return relabel(StateVector::basis("a", 1));
    if (name == "up_x") return relabel(StateVector::from_qubit("a", r, r));
    throw DomainError("unknown state '" + name + "'");
}

StateVector source_state(const EventNode& source)
{
    if (!source.state_name.empty()) {
        return named_state(source.state_name, source.participants);
    }
    return StateVector(source.participants, source.amplitudes);
}

std::string hex_digest(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

Json Record::to_json() const
{
    return Json{{"labels", state.labels()}, {"amplitudes", amplitudes_json(state.amplitudes())},
                {"provenance", provenance}};
}

std::map<std::string, std::string> pointer_labels(const Scenario& s)
{
    std::map<std::string, std::string> out;
    std::map<std::string, int> count;
    for (const auto* e : s.ordered_events()) {
        if (e->kind != EventKind::Measurement) {
            continue;
        }
        const int k = ++count[e->measurer];
        out[e->id] = k == 1 ? e->measurer : e->measurer + "#" + std::to_string(k);
    }
    return out;
}

std::map<std::string, std::string> resolve_settings(const Scenario& s)
{
    std::mt19937_64 rng(s.seed);
    std::map<std::string, std::string> out;
    for (const auto* e : s.ordered_events()) {
        if (e->kind != EventKind::Measurement) {
            continue;
        }
        const auto options = setting_options(e->setting);
        out[e->id] = options.size() == 1 ? options[0] : options[rng() % options.size()];
    }
    return out;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights)
{
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(sum > 0.0)) {
        throw DomainError("apportionment needs a positive total weight");
    }
    std::vector<std::size_t> out(weights.size());
    std::vector<double> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double q = static_cast<double>(total) * weights[i] / sum;
        if (std::abs(q - std::round(q)) < 1e-9) {
            q = std::round(q);
        }
        out[i] = static_cast<std::size_t>(std::floor(q));
        remainder[i] = q - std::floor(q);
        assigned += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) {
        ++out[order[k]];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

struct Join {
    /// groups[g][p] = copy index of participant p
    std::vector<std::vector<std::size_t>> groups;
    std::size_t residue = 0;
    std::size_t nonzero_combinations = 0;
};

class Simulator {
public:
    explicit Simulator(const Scenario& s)
        : s_(s), settings_(resolve_settings(s)), pointers_(pointer_labels(s))
    {
        const auto empty = make_record({});
        for (const auto& sys : s_.systems) {
            auto& v = lives_[sys.id];
            for (std::size_t k = 0; k < s_.n; ++k) {
                v.push_back(Life{sys.id, k, empty, {}, {}});
            }
        }
    }

    RunResult run()
    {
        RunResult out;
        out.scenario = s_;
        out.settings = settings_;
        out.pointers = pointers_;
        Json header{{"type", "header"},
                    {"format", "lworlds-trace/1"},
                    {"scenario", s_.to_json()},
                    {"scenario_digest", s_.digest()},
                    {"n", s_.n},
                    {"seed", s_.seed},
                    {"settings", settings_},
                    {"pointers", pointers_}};
        trace_.push_back(std::move(header));
        for (const auto* e : s_.ordered_events()) {
            process(*e);
        }
        out.trace = std::move(trace_);
        out.stats = std::move(stats_);
        out.summaries = std::move(summaries_);
        out.lives = std::move(lives_);
        return out;
    }

private:
    StateVector replay(const std::vector<std::string>& provenance) const
    {
        std::vector<const EventNode*> ops;
        for (const auto& id : provenance) {
            ops.push_back(&s_.event(id));
        }
        std::sort(ops.begin(), ops.end(), [](const EventNode* a, const EventNode* b) {
            return a->t != b->t ? a->t < b->t : a->id < b->id;
        });
        StateVector state;
        for (const auto* e : ops) {
            if (e->kind == EventKind::Source) {
                state = hilbert::tensor(state, source_state(*e));
            } else if (e->kind == EventKind::Measurement) {
                const auto& pointer = pointers_.at(e->id);
                state = hilbert::tensor(state, StateVector::basis(pointer, 0));
                state = hilbert::apply(
                    hilbert::measurement_coupling(e->system, pointer, Observable::parse(settings_.at(e->id))), state);
            }
        }
        return state;
    }

    RecordPtr make_record(std::set<std::string> provenance) const
    {
        Record r;
        r.provenance.assign(provenance.begin(), provenance.end());
        r.state = replay(r.provenance);
        r.digest = hex_digest(r.to_json().dump());
        return std::make_shared<const Record>(std::move(r));
    }

    std::vector<std::pair<hilbert::Label, int>> pointer_bits(const Knowledge& k) const
    {
        std::vector<std::pair<hilbert::Label, int>> bits;
        for (const auto& [event, value] : k) {
            bits.emplace_back(pointers_.at(event), value > 0 ? 0 : 1);
        }
        return bits;
    }

    double probability(const StateVector& state, const Knowledge& k) const
    {
        const auto bits = pointer_bits(k);
        return hilbert::basis_probability(state, bits);
    }

    /// Pairs the lives of the participants by knowledge class, in proportion
    /// to the joint probability of their known outcomes.
    Join join(const std::vector<std::string>& participants, const StateVector& state) const
    {
        const std::size_t P = participants.size();
        std::vector<std::vector<std::pair<Knowledge, std::vector<std::size_t>>>> classes(P);
        for (std::size_t p = 0; p < P; ++p) {
            std::map<Knowledge, std::vector<std::size_t>> by;
            for (const auto& life : lives_.at(participants[p])) {
                by[life.knowledge].push_back(life.copy);
            }
            classes[p].assign(by.begin(), by.end());
        }
        struct Combo {
            std::vector<std::size_t> pick;
            double weight;
        };
        std::vector<Combo> combos;
        std::vector<std::size_t> pick(P, 0);
        for (;;) {
            Knowledge merged;
            bool compatible = true;
            for (std::size_t p = 0; p < P && compatible; ++p) {
                for (const auto& [event, value] : classes[p][pick[p]].first) {
                    auto [it, fresh] = merged.emplace(event, value);
                    compatible = fresh || it->second == value;
                    if (!compatible) break;
                }
            }
            if (compatible) {
                const double w = probability(state, merged);
                if (w > kProbabilityFloor) {
                    combos.push_back({pick, w});
                }
            }
            std::size_t p = P;
            while (p > 0 && ++pick[p - 1] == classes[p - 1].size()) {
                pick[--p] = 0;
            }
            if (p == 0) break;
        }
        Join out;
        out.nonzero_combinations = combos.size();
        if (combos.empty()) {
            throw ProportionError("no outcome combination of the participants has nonzero probability");
        }
        std::vector<double> weights;
        for (const auto& c : combos) weights.push_back(c.weight);
        const auto targets = apportion(s_.n, weights);

        std::vector<std::vector<std::size_t>> used(P);
        for (std::size_t p = 0; p < P; ++p) used[p].assign(classes[p].size(), 0);
        auto available = [&](const Combo& c) {
            std::size_t a = s_.n;
            for (std::size_t p = 0; p < P; ++p) {
                a = std::min(a, classes[p][c.pick[p]].second.size() - used[p][c.pick[p]]);
            }
            return a;
        };
        auto take = [&](const Combo& c, std::size_t k) {
            for (std::size_t i = 0; i < k; ++i) {
                std::vector<std::size_t> g(P);
                for (std::size_t p = 0; p < P; ++p) {
                    g[p] = classes[p][c.pick[p]].second[used[p][c.pick[p]]++];
                }
                out.groups.push_back(std::move(g));
            }
        };
        for (std::size_t c = 0; c < combos.size(); ++c) {
            take(combos[c], std::min(targets[c], available(combos[c])));
        }
        // Rounding may leave lives whose preferred combination is full.
        for (const auto& c : combos) {
            take(c, available(c));
        }
        out.residue = s_.n - out.groups.size();
        return out;
    }

    static std::set<std::string> provenance_union(const std::vector<const Life*>& lives)
    {
        std::set<std::string> out;
        for (const auto* l : lives) {
            out.insert(l->record->provenance.begin(), l->record->provenance.end());
        }
        return out;
    }

    std::vector<const Life*> all_lives(const std::vector<std::string>& systems) const
    {
        std::vector<const Life*> out;
        for (const auto& s : systems) {
            for (const auto& l : lives_.at(s)) out.push_back(&l);
        }
        return out;
    }

    /// Runs of equal (pre, post) digests over copy indices.
    Json life_runs(const std::vector<std::string>& pre, const std::vector<Life>& lives) const
    {
        Json runs = Json::array();
        std::size_t from = 0;
        for (std::size_t k = 1; k <= lives.size(); ++k) {
            if (k == lives.size() || pre[k] != pre[from] || lives[k].record->digest != lives[from].record->digest) {
                runs.push_back(Json{{"from", from}, {"to", k}, {"pre", pre[from]}, {"post", lives[from].record->digest}});
                from = k;
            }
        }
        return runs;
    }

    std::vector<std::string> digests(const std::string& system) const
    {
        std::vector<std::string> out;
        for (const auto& l : lives_.at(system)) out.push_back(l.record->digest);
        return out;
    }

    void add_records(Json& records, const std::string& system) const
    {
        for (const auto& l : lives_.at(system)) {
            if (!records.contains(l.record->digest)) {
                records[l.record->digest] = l.record->to_json();
            }
        }
    }

    void process(const EventNode& e)
    {
        const auto involved = e.involved();
        Json line{{"type", "event"}, {"event", e.id}, {"kind", to_string(e.kind)}, {"participants", involved}};
        Json records = Json::object();
        std::map<std::string, std::vector<std::string>> pre;
        for (const auto& s : involved) {
            pre[s] = digests(s);
            add_records(records, s);
        }
        auto prov = provenance_union(all_lives(involved));
        prov.insert(e.id);
        const auto record = make_record(std::move(prov));

        if (e.kind == EventKind::Source) {
            for (const auto& s : involved) {
                for (auto& l : lives_[s]) l.record = record;
            }
        } else if (e.kind == EventKind::Measurement) {
            measure(e, record, line);
        } else {
            meet(e, record, line);
        }

        Json lives = Json::object();
        for (const auto& s : involved) {
            add_records(records, s);
            lives[s] = life_runs(pre[s], lives_.at(s));
        }
        line["records"] = std::move(records);
        line["lives"] = std::move(lives);
        trace_.push_back(std::move(line));
    }

    void measure(const EventNode& e, const RecordPtr& record, Json& line)
    {
        const auto& setting = settings_.at(e.id);
        const auto& pointer = pointers_.at(e.id);
        line["setting"] = setting;
        line["pointer"] = pointer;
        const std::vector<std::string> who{e.system, e.measurer};
        const auto j = join(who, record->state);
        if (j.residue > 0) {
            throw ProportionError("measurement " + e.id + " could not pair every life of " + e.system + " and " +
                                  e.measurer);
        }
        auto& sys = lives_[e.system];
        auto& obs = lives_[e.measurer];

        // knowledge class -> groups, ascending measurer copy
        std::map<Knowledge, std::vector<std::size_t>> classes;
        for (std::size_t g = 0; g < j.groups.size(); ++g) {
            Knowledge k = sys[j.groups[g][0]].knowledge;
            for (const auto& kv : obs[j.groups[g][1]].knowledge) k.insert(kv);
            classes[k].push_back(g);
        }
        std::vector<int> value_of(s_.n, 0);
        for (auto& [k, members] : classes) {
            std::sort(members.begin(), members.end(),
                      [&](std::size_t a, std::size_t b) { return j.groups[a][1] < j.groups[b][1]; });
            const double base = probability(record->state, k);
            std::vector<double> p(2);
            for (int idx = 0; idx < 2; ++idx) {
                Knowledge with = k;
                with[e.id] = idx == 0 ? +1 : -1;
                p[idx] = probability(record->state, with) / base;
                if (p[idx] <= kProbabilityFloor) p[idx] = 0.0;
            }
            const std::size_t branches = (p[0] > 0) + (p[1] > 0);
            if (members.size() < branches) {
                throw ProportionError("measurement " + e.id + ": " + std::to_string(members.size()) +
                                      " lives cannot represent " + std::to_string(branches) + " outcomes");
            }
            const auto counts = apportion(members.size(), p);
            for (std::size_t i = 0; i < members.size(); ++i) {
                const int v = i < counts[0] ? +1 : -1;
                const auto& g = j.groups[members[i]];
                for (auto* life : {&sys[g[0]], &obs[g[1]]}) {
                    life->knowledge = k;
                    life->knowledge[e.id] = v;
                    life->log.push_back({e.id, setting, v});
                    life->record = record;
                }
                value_of[g[1]] = v;
            }
        }

        Json outcomes{{"+1", Json::array()}, {"-1", Json::array()}};
        std::size_t from = 0;
        for (std::size_t k = 1; k <= s_.n; ++k) {
            if (k == s_.n || value_of[k] != value_of[from]) {
                outcomes[value_string(value_of[from])].push_back(Json::array({from, k}));
                from = k;
            }
        }
        line["outcomes"] = std::move(outcomes);
        line["groups"] = j.groups;
        line["residue"] = 0;

        for (int v : {+1, -1}) {
            const auto count = static_cast<std::size_t>(std::count(value_of.begin(), value_of.end(), v));
            stats_.push_back({e.id, "measurement", e.measurer, value_string(v), count,
                              static_cast<double>(count) / static_cast<double>(s_.n)});
        }
    }

    /// Known measurement events ordered by measurer position in the scenario.
    std::vector<std::string> ordered_known(const Knowledge& k) const
    {
        std::vector<std::string> ids;
        for (const auto& kv : k) ids.push_back(kv.first);
        auto rank = [&](const std::string& id) {
            const auto& m = s_.event(id).measurer;
            for (std::size_t i = 0; i < s_.systems.size(); ++i) {
                if (s_.systems[i].id == m) return i;
            }
            return s_.systems.size();
        };
        std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
            const auto ra = rank(a), rb = rank(b);
            if (ra != rb) return ra < rb;
            const auto& ea = s_.event(a);
            const auto& eb = s_.event(b);
            return ea.t != eb.t ? ea.t < eb.t : a < b;
        });
        return ids;
    }

    void meet(const EventNode& e, const RecordPtr& record, Json& line)
    {
        const auto j = join(e.participants, record->state);
        if (j.residue >= j.nonzero_combinations) {
            throw ProportionError("meeting " + e.id + " leaves " + std::to_string(j.residue) + " lives unpaired");
        }
        for (const auto& p : e.participants) {
            for (auto& l : lives_[p]) l.record = record;
        }
        std::map<std::pair<std::string, std::string>, std::size_t> joint;
        std::map<std::string, MeetingSummary> summaries;
        for (const auto& g : j.groups) {
            Knowledge k;
            for (std::size_t p = 0; p < g.size(); ++p) {
                const auto& own = lives_[e.participants[p]][g[p]].knowledge;
                k.insert(own.begin(), own.end());
            }
            for (std::size_t p = 0; p < g.size(); ++p) {
                lives_[e.participants[p]][g[p]].knowledge = k;
            }
            const auto known = ordered_known(k);
            std::string key, values, settings;
            std::vector<std::string> setting_list;
            int product = 1;
            for (const auto& id : known) {
                key += (key.empty() ? "" : "|") + id;
                values += (values.empty() ? "" : "|") + value_string(k.at(id));
                setting_list.push_back(settings_.at(id));
                product *= k.at(id);
            }
            ++joint[{key, values}];
            if (known.size() >= 2) {
                auto& sm = summaries[key];
                sm.event = e.id;
                sm.events = known;
                sm.settings = correlations::CorrelationSpec::settings_string(setting_list);
                ++sm.products[product];
                ++sm.groups;
            }
        }
        for (const auto& [kv, count] : joint) {
            stats_.push_back({e.id, "meeting", kv.first, kv.second, count,
                              static_cast<double>(count) / static_cast<double>(j.groups.size())});
        }
        for (auto& [key, sm] : summaries) summaries_.push_back(std::move(sm));
        line["groups"] = j.groups;
        line["residue"] = j.residue;
    }

    const Scenario& s_;
    std::map<std::string, std::string> settings_;
    std::map<std::string, std::string> pointers_;
    std::map<std::string, std::vector<Life>> lives_;
    std::vector<Json> trace_;
    std::vector<StatRow> stats_;
    std::vector<MeetingSummary> summaries_;
};

}  // namespace

RunResult run_scenario(const Scenario& s)
{
    s.validate();
    return Simulator(s).run();
}

std::string RunResult::trace_text() const
{
    std::string out;
    for (const auto& line : trace) {
        out += line.dump() + "\n";
    }
    return out;
}

std::string RunResult::stats_csv() const
{
    std::string out = "event,kind,key,outcome,count,fraction\n";
    char buf[64];
    for (const auto& r : stats) {
        std::snprintf(buf, sizeof buf, "%.6g", r.fraction);
        out += r.event + "," + r.kind + "," + r.key + "," + r.outcome + "," + std::to_string(r.count) + "," + buf + "\n";
    }
    return out;
}

const Life& RunResult::life(const std::string& system, std::size_t copy) const
{
    const auto it = lives.find(system);
    if (it == lives.end() || copy >= it->second.size()) {
        throw LookupError("no life " + system + "[" + std::to_string(copy) + "]");
    }
    return it->second[copy];
}

std::string MeetingSummary::to_string() const
{
    std::string out = event + ": " + settings + " product = ";
    bool first = true;
    for (auto it = products.rbegin(); it != products.rend(); ++it) {
        if (!first) out += ", ";
        out += value_string(it->first) + " in " +
               percent(100.0 * static_cast<double>(it->second) / static_cast<double>(groups)) + "% of meetings";
        first = false;
    }
    return out;
}

std::optional<int> predict_with_certainty(const Life& life, const std::map<std::string, std::string>& pointers,
                                          const hilbert::Label& label, const Observable& observable)
{
    if (!life.record || !life.record->state.has_label(label)) {
        return std::nullopt;
    }
    std::vector<hilbert::Setting> settings;
    std::vector<int> want;
    for (const auto& [event, value] : life.knowledge) {
        const auto& pointer = pointers.at(event);
        if (pointer == label) {
            if (observable.kind() == hilbert::PauliKind::Z) {
                return value;
            }
            continue;
        }
        settings.emplace_back(pointer, Observable::z());
        want.push_back(value);
    }
    settings.emplace_back(label, observable);
    const auto dist = hilbert::born_distribution(life.record->state, settings);
    double p_plus = 0.0, total = 0.0;
    for (const auto& entry : dist.entries) {
        if (!std::equal(want.begin(), want.end(), entry.values.begin())) {
            continue;
        }
        total += entry.probability;
        if (entry.values.back() > 0) {
            p_plus += entry.probability;
        }
    }
    if (total <= kProbabilityFloor) {
        return std::nullopt;
    }
    const double p = p_plus / total;
    if (p >= 1.0 - kProbabilityFloor) return +1;
    if (p <= kProbabilityFloor) return -1;
    return std::nullopt;
}

}  // namespace lw::worlds
