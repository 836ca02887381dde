#include "doctest.h"

#include "lworlds/correlations.hpp"
#include "lworlds/errors.hpp"
#include "lworlds/worlds.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace lw;
using namespace lw::worlds;
using hilbert::Observable;

namespace {

std::string scenario_path(const std::string& name) { return std::string(LW_SOURCE_DIR) + "/scenarios/" + name + ".scn"; }

Scenario load(const std::string& name) { return Scenario::load(scenario_path(name)); }

std::size_t stat(const RunResult& r, const std::string& event, const std::string& key, const std::string& outcome)
{
    for (const auto& row : r.stats)
        if (row.event == event && row.key == key && row.outcome == outcome) return row.count;
    return 0;
}

const MeetingSummary* summary(const RunResult& r, const std::string& event, std::size_t parties)
{
    for (const auto& s : r.summaries)
        if (s.event == event && s.events.size() == parties) return &s;
    return nullptr;
}

StateVector eigen_qubit(const std::string& label, const Observable& o, int value)
{
    const auto [c0, c1] = o.eigenvector(value);
    return StateVector::from_qubit(label, c0, c1);
}

Scenario single_spin(std::vector<hilbert::complex> amps, std::size_t n, const std::string& setting = "Z")
{
    Scenario s;
    s.name = "spin";
    s.n = n;
    s.systems = {{"a", 0.0, std::nullopt}, {"A", 0.0, std::nullopt}};
    EventNode src;
    src.id = "S";
    src.kind = EventKind::Source;
    src.participants = {"a"};
    src.amplitudes = std::move(amps);
    EventNode m;
    m.id = "M";
    m.kind = EventKind::Measurement;
    m.t = 1;
    m.system = "a";
    m.measurer = "A";
    m.setting = setting;
    s.events = {src, m};
    return s;
}

}  // namespace

TEST_CASE("apportion: largest remainder")
{
    CHECK(apportion(1000, {0.7, 0.3}) == std::vector<std::size_t>{700, 300});
    CHECK(apportion(3, {1, 1}) == std::vector<std::size_t>{2, 1});
    CHECK(apportion(1, {0.5, 0.5}) == std::vector<std::size_t>{1, 0});
    CHECK(apportion(10, {1, 0}) == std::vector<std::size_t>{10, 0});
    CHECK(apportion(7, {1, 1, 1}) == std::vector<std::size_t>{3, 2, 2});
    CHECK_THROWS_AS(apportion(3, {0, 0}), DomainError);
}

TEST_CASE("EPR run: 500/500 classes and same-outcome pairings")
{
    const auto r = run_scenario(load("epr"));
    CHECK(stat(r, "M_A", "A", "+1") == 500);
    CHECK(stat(r, "M_A", "A", "-1") == 500);
    CHECK(stat(r, "M_B", "B", "+1") == 500);
    CHECK(stat(r, "F", "M_A|M_B", "+1|+1") == 500);
    CHECK(stat(r, "F", "M_A|M_B", "-1|-1") == 500);
    CHECK(stat(r, "F", "M_A|M_B", "+1|-1") == 0);
    CHECK(stat(r, "F", "M_A|M_B", "-1|+1") == 0);
    const auto* s = summary(r, "F", 2);
    REQUIRE(s != nullptr);
    CHECK(s->to_string() == "F: ZZ product = +1 in 100% of meetings");

    const auto& rec = *r.life("A", 0).record;
    CHECK(rec.state.labels() == std::vector<std::string>{"a", "b", "A", "B"});

    // Every up-Alice is paired with an up-Bob.
    for (std::size_t k = 0; k < 1000; ++k) {
        const auto& life = r.life("A", k);
        CHECK(life.knowledge.at("M_A") == life.knowledge.at("M_B"));
    }
}

TEST_CASE("measurement record holds only locally present labels")
{
    auto scn = load("epr");
    scn.events.pop_back();  // drop the meeting
    scn.events.pop_back();  // and Bob's measurement
    const auto r = run_scenario(scn);
    // U_Aa on the source state with A's pointer: (|000> - |111>)/sqrt2 over
    // (a, b, A). Nothing about B.
    const auto& rec = *r.life("A", 0).record;
    CHECK(rec.state.labels() == std::vector<std::string>{"a", "b", "A"});
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(rec.state.approx_equal(StateVector({"a", "b", "A"}, {h, 0, 0, 0, 0, 0, 0, -h})));
    CHECK(rec.provenance == std::vector<std::string>{"M_A", "S"});
    CHECK(r.life("a", 3).record == r.life("A", 3).record);
    CHECK(r.life("b", 0).record->provenance == std::vector<std::string>{"S"});
}

TEST_CASE("x-correlated pipeline: source, measurement and meeting states")
{
    const auto r = run_scenario(load("epr_x"));
    const auto x = Observable::x();
    // Meeting record: (|ux>|"+">_A|ux>|"+">_B + |dx>|"-">_A|dx>|"-">_B)/sqrt2
    CHECK(r.life("A", 0).record->state.approx_equal(correlations::measured_pair_state()));
    CHECK(stat(r, "F", "M_A|M_B", "+1|+1") == 500);
    CHECK(stat(r, "F", "M_A|M_B", "-1|-1") == 500);

    auto scn = load("epr_x");
    scn.events.resize(2);
    const auto one = run_scenario(scn);
    const double h = 1.0 / std::sqrt(2.0);
    const auto up = hilbert::tensor(hilbert::tensor(eigen_qubit("a", x, 1), eigen_qubit("b", x, 1)),
                                    StateVector::basis("A", 0));
    const auto down = hilbert::tensor(hilbert::tensor(eigen_qubit("a", x, -1), eigen_qubit("b", x, -1)),
                                      StateVector::basis("A", 1));
    std::vector<hilbert::complex> amps(8);
    for (std::size_t i = 0; i < 8; ++i) amps[i] = h * (up.amplitudes()[i] + down.amplitudes()[i]);
    CHECK(one.life("A", 0).record->state.approx_equal(StateVector({"a", "b", "A"}, amps)));
}

TEST_CASE("GHZ runs: meeting products follow the constraints")
{
    const std::pair<const char*, int> cases[] = {{"ghz_xxx", -1}, {"ghz_yyx", 1}, {"ghz_xyy", 1}, {"ghz_yxy", 1}};
    for (const auto& [name, product] : cases) {
        const auto r = run_scenario(load(name));
        for (const char* m : {"M_A", "M_B", "M_C"}) {
            CHECK(stat(r, m, std::string(1, m[2]), "+1") == 500);
        }
        // pairwise: two parties' products are unbiased
        const auto* ab = summary(r, "F_AB", 2);
        REQUIRE(ab != nullptr);
        CHECK(ab->products.at(1) == 500);
        CHECK(ab->products.at(-1) == 500);
        for (const char* f : {"F_BC", "F_CA"}) {
            const auto* s = summary(r, f, 3);
            REQUIRE(s != nullptr);
            CHECK(s->groups == 1000);
            CHECK(s->products.size() == 1);
            CHECK(s->products.count(product) == 1);
        }
    }
    const auto r = run_scenario(load("ghz_xxx"));
    CHECK(summary(r, "F_BC", 3)->to_string() == "F_BC: XXX product = -1 in 100% of meetings");
    const auto three = run_scenario(load("ghz_meet3"));
    CHECK(summary(three, "F", 3)->to_string() == "F: XXX product = -1 in 100% of meetings");
}

TEST_CASE("meeting frequencies match the joint Born distribution")
{
    const auto r = run_scenario(load("chsh"));
    // Singlet at relative angle 225 deg: P(++) = P(--) = (1 - cos 225)/4.
    const double same = (1.0 - std::cos(225.0 * M_PI / 180.0)) / 4.0;
    const double diff = 0.5 - same;
    CHECK(std::abs(stat(r, "F", "M_A|M_B", "+1|+1") - 1000 * same) <= 1.0);
    CHECK(std::abs(stat(r, "F", "M_A|M_B", "-1|-1") - 1000 * same) <= 1.0);
    CHECK(std::abs(stat(r, "F", "M_A|M_B", "+1|-1") - 1000 * diff) <= 1.0);
    CHECK(std::abs(stat(r, "F", "M_A|M_B", "-1|+1") - 1000 * diff) <= 1.0);

    const auto ind = run_scenario(load("independent"));
    for (const char* o : {"+1|+1", "+1|-1", "-1|+1", "-1|-1"}) CHECK(stat(ind, "F", "M_A|M_B", o) == 250);
}

TEST_CASE("Born proportions")
{
    const auto r = run_scenario(load("born"));
    CHECK(stat(r, "M_A", "A", "+1") == 700);
    CHECK(stat(r, "M_A", "A", "-1") == 300);

    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 100; ++trial) {
        const auto amp = oracle::random_state(rng, 1);
        const double p = std::norm(amp[0]);
        const auto run = run_scenario(single_spin({amp[0], amp[1]}, 1000));
        CHECK(std::abs(static_cast<double>(stat(run, "M", "A", "+1")) - 1000 * p) <= 1.0);
        CHECK(stat(run, "M", "A", "+1") + stat(run, "M", "A", "-1") == 1000);
    }
}

TEST_CASE("eigenstates, repetition and degenerate branches")
{
    const auto up = run_scenario(single_spin({1.0, 0.0}, 10));
    CHECK(stat(up, "M", "A", "+1") == 10);
    CHECK(stat(up, "M", "A", "-1") == 0);

    const auto r = run_scenario(load("sequential"));
    for (std::size_t k = 0; k < 1000; ++k) {
        const auto& life = r.life("A", k);
        REQUIRE(life.log.size() == 4);
        CHECK(life.log[0].value == life.log[1].value);
    }
    CHECK(stat(r, "M1", "A", "+1") == 500);
    CHECK(stat(r, "M3", "A", "+1") == 500);
    CHECK(stat(r, "M4", "A", "+1") == 500);
    // after X, Z is fresh again in each class
    std::size_t agree = 0;
    for (std::size_t k = 0; k < 1000; ++k) agree += r.life("A", k).log[3].value == r.life("A", k).log[0].value;
    CHECK(agree == 500);

    CHECK_THROWS_AS(run_scenario(single_spin({std::sqrt(0.5), std::sqrt(0.5)}, 1)), ProportionError);
}

TEST_CASE("no events: identical lives with empty logs")
{
    Scenario s;
    s.n = 5;
    s.systems = {{"a", 0.0, std::nullopt}};
    const auto r = run_scenario(s);
    REQUIRE(r.lives.at("a").size() == 5);
    for (const auto& l : r.lives.at("a")) {
        CHECK(l.log.empty());
        CHECK(l.record->digest == r.lives.at("a")[0].record->digest);
    }
}

TEST_CASE("predict with certainty")
{
    auto scn = load("epr");
    scn.events.resize(2);
    const auto r = run_scenario(scn);
    for (std::size_t k : {0u, 999u}) {
        const auto& alice = r.life("A", k);
        const int v = alice.knowledge.at("M_A");
        CHECK(predict_with_certainty(alice, r.pointers, "b", Observable::z()) == v);
        CHECK(predict_with_certainty(alice, r.pointers, "a", Observable::z()) == v);
        CHECK(predict_with_certainty(alice, r.pointers, "A", Observable::z()) == v);
        CHECK_FALSE(predict_with_certainty(alice, r.pointers, "b", Observable::x()).has_value());
        CHECK_FALSE(predict_with_certainty(alice, r.pointers, "B", Observable::z()).has_value());
    }
    scn.events.resize(1);
    const auto before = run_scenario(scn);
    CHECK_FALSE(predict_with_certainty(before.life("a", 0), before.pointers, "a", Observable::z()).has_value());
    CHECK_FALSE(predict_with_certainty(before.life("A", 0), before.pointers, "a", Observable::z()).has_value());
}

TEST_CASE("validation")
{
    auto bad = load("epr");
    bad.events[3].x = 5;  // Alice cannot reach the meeting in time
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("spacelike dependency between events M_A and F"),
                         ValidationError);

    auto role = load("epr");
    role.events[2].measurer = "a";
    CHECK_THROWS_AS(role.validate(), ValidationError);

    auto lonely = load("epr");
    lonely.events[3].participants = {"A"};
    CHECK_THROWS_AS(lonely.validate(), ValidationError);

    auto state = load("epr");
    state.events[0].state_name = "ghz";
    CHECK_THROWS_AS(state.validate(), ValidationError);

    auto moving = load("epr");
    moving.systems[2].v = 0.0;  // A declared at rest at x = -1 but meets at x = 0
    CHECK_THROWS_WITH_AS(moving.validate(), doctest::Contains("not co-located"), ValidationError);

    auto dup = load("epr");
    dup.events[1].id = "S";
    CHECK_THROWS_AS(dup.validate(), ValidationError);

    auto setting = load("epr");
    setting.events[1].setting = "W";
    CHECK_THROWS_AS(setting.validate(), ValidationError);

    CHECK_THROWS_AS(Scenario::load("/nonexistent/x.scn"), ParseError);
    CHECK_THROWS_AS(Scenario::from_json(Json::parse(R"({"systems": [{"id": 3}], "events": []})")), ParseError);
}

TEST_CASE("determinism and seeded settings")
{
    const auto a = run_scenario(load("ghz_random"));
    const auto b = run_scenario(load("ghz_random"));
    CHECK(a.trace_text() == b.trace_text());
    CHECK(a.settings == b.settings);
    for (const auto& [event, setting] : a.settings) CHECK((setting == "X" || setting == "Y"));

    // The scenario round-trips through its JSON form.
    const auto scn = load("ghz_xxx");
    CHECK(Scenario::from_json(scn.to_json()).digest() == scn.digest());
    CHECK(a.stats_csv().rfind("event,kind,key,outcome,count,fraction\n", 0) == 0);
}
