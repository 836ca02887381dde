#include "doctest.h"

#include "lworlds/audit.hpp"
#include "lworlds/errors.hpp"
#include "mutations.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace lw;
using namespace lw::audit;

namespace {

const std::string kSource = LW_SOURCE_DIR;

worlds::RunResult run(const std::string& name, std::size_t n = 1000)
{
    auto s = worlds::Scenario::load(kSource + "/scenarios/" + name + ".scn");
    s.n = n;
    return worlds::run_scenario(s);
}

Trace trace_of(const std::string& name, std::size_t n = 1000) { return Trace::from_run(run(name, n)); }

bool failed(const AuditReport& r, const std::string& id, const std::string& event)
{
    for (const auto& c : r.failures()) {
        if (c.id == id && c.subject == event) return true;
    }
    return false;
}

std::string read(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("honest traces pass the audit")
{
    for (const auto& entry : std::filesystem::directory_iterator(kSource + "/scenarios")) {
        const auto name = entry.path().stem().string();
        CAPTURE(name);
        const auto t = trace_of(name);
        const auto report = locality_audit(t);
        CHECK_MESSAGE(report.pass, report.to_string());
        CHECK(report.checks.size() >= 3 * t.events.size());
        CHECK(locality_audit(t, t.scenario).pass);
    }
}

TEST_CASE("shipped mutation fixtures match their generator and fail")
{
    const auto dir = kSource + "/tests/fixtures/";
    const bool regenerate = std::getenv("LWORLDS_REGENERATE_FIXTURES") != nullptr;
    for (const auto& f : mutation::fixtures(kSource)) {
        CAPTURE(f.file);
        if (regenerate) {
            std::ofstream(dir + f.file) << f.text;
        }
        CHECK(read(dir + f.file) == f.text);

        const auto report = locality_audit(Trace::load(dir + f.file));
        CHECK_FALSE(report.pass);
        bool found = false;
        for (const auto& c : report.failures()) {
            CHECK(c.subject == f.event);
            found = found || c.detail.find(f.detail) != std::string::npos;
        }
        CHECK_MESSAGE(found, report.to_string());
    }
}

TEST_CASE("leaked provenance fails both locality and replay")
{
    const auto text = run("epr", 100).trace_text();
    const auto report = locality_audit(Trace::parse(mutation::leak_provenance(text, "M_A", "A", "M_B")));
    CHECK(failed(report, "locality", "M_A"));
    CHECK(failed(report, "record", "M_A"));
    CHECK_FALSE(failed(report, "locality", "F"));

    const auto state_only = locality_audit(Trace::parse(mutation::leak_state(text, "M_A", "A", "M_B")));
    CHECK_FALSE(failed(state_only, "locality", "M_A"));
    CHECK(failed(state_only, "record", "M_A"));
}

TEST_CASE("integrity errors")
{
    const auto text = run("epr", 50).trace_text();
    CHECK_THROWS_AS(Trace::parse(""), IntegrityError);
    CHECK_THROWS_AS(Trace::parse("not json\n"), IntegrityError);
    CHECK_THROWS_AS(Trace::parse(text.substr(text.find('\n') + 1)), IntegrityError);
    CHECK_THROWS_AS(Trace::load(kSource + "/no/such.trace.jsonl"), ParseError);

    auto lines = mutation::lines_of(text);

    SUBCASE("record content without a fresh digest")
    {
        auto& recs = mutation::line_of(lines, "M_A")["records"];
        auto& first = recs.begin().value();
        first["provenance"].push_back("M_B");
        CHECK_THROWS_AS(locality_audit(Trace::parse(mutation::text_of(lines))), IntegrityError);
    }
    SUBCASE("missing event line")
    {
        lines.erase(lines.begin() + 2);
        CHECK_THROWS_AS(locality_audit(Trace::parse(mutation::text_of(lines))), IntegrityError);
    }
    SUBCASE("events out of order")
    {
        std::swap(lines[2], lines[3]);
        CHECK_THROWS_AS(locality_audit(Trace::parse(mutation::text_of(lines))), IntegrityError);
    }
    SUBCASE("scenario swapped under the digest")
    {
        lines[0]["scenario"]["n"] = 51;
        CHECK_THROWS_AS(locality_audit(Trace::parse(mutation::text_of(lines))), IntegrityError);
    }
    SUBCASE("setting outside the scenario's options")
    {
        lines[0]["settings"]["M_A"] = "X";
        CHECK_THROWS_AS(locality_audit(Trace::parse(mutation::text_of(lines))), IntegrityError);
    }
    SUBCASE("a different scenario")
    {
        const auto other = worlds::Scenario::load(kSource + "/scenarios/epr_x.scn");
        CHECK_THROWS_AS(locality_audit(Trace::parse(text), other), IntegrityError);
    }
}

TEST_CASE("tampered outcomes and pairings")
{
    SUBCASE("outcome proportions")
    {
        auto lines = mutation::lines_of(run("born", 100).trace_text());
        auto& line = mutation::line_of(lines, "M_A");
        // 70/30 becomes 80/20
        line["outcomes"] = Json{{"+1", {{0, 80}}}, {"-1", {{80, 100}}}};
        const auto report = locality_audit(Trace::parse(mutation::text_of(lines)));
        CHECK(failed(report, "outcomes", "M_A"));
    }
    SUBCASE("zero-probability outcome")
    {
        auto lines = mutation::lines_of(run("sequential", 100).trace_text());
        auto& line = mutation::line_of(lines, "M2");
        auto& out = line["outcomes"];
        // one copy that saw +1 at M1 now reports -1 at the repeated Z
        const auto plus = out["+1"][0];
        const std::size_t first = plus[0].get<std::size_t>();
        out["+1"][0][0] = first + 1;
        out["-1"].push_back(Json::array({first, first + 1}));
        const auto report = locality_audit(Trace::parse(mutation::text_of(lines)));
        REQUIRE(failed(report, "outcomes", "M2"));
        CHECK(report.failures().front().detail.find("zero-probability") != std::string::npos);
    }
    SUBCASE("incompatible meeting")
    {
        auto lines = mutation::lines_of(run("epr", 100).trace_text());
        auto& out = mutation::line_of(lines, "M_A")["outcomes"];
        std::swap(out["+1"], out["-1"]);
        const auto report = locality_audit(Trace::parse(mutation::text_of(lines)));
        CHECK_FALSE(failed(report, "outcomes", "M_A"));
        CHECK(failed(report, "pairings", "F"));
    }
    SUBCASE("broken continuity")
    {
        auto lines = mutation::lines_of(run("epr", 100).trace_text());
        auto& line = mutation::line_of(lines, "F");
        auto& runs = line["lives"]["A"];
        runs[0]["pre"] = line["lives"]["B"][0]["pre"];
        const auto report = locality_audit(Trace::parse(mutation::text_of(lines)));
        CHECK(failed(report, "continuity", "F"));
    }
}

TEST_CASE("no-signaling between setting choices")
{
    const auto z = trace_of("epr");
    const auto x = trace_of("epr_bob_x");
    const auto r = no_signaling_check(z, x, {"a", "A"});
    CHECK_MESSAGE(r.pass, r.to_string());
    // S and M_A lie outside M_B's future
    CHECK(r.checks.size() == 3);

    const auto xyy = trace_of("ghz_xyy");
    const auto xxy = trace_of("ghz_xxy");
    CHECK(no_signaling_check(xyy, xxy, {"c", "C"}).pass);
    CHECK(no_signaling_check(xyy, xxy, {"a", "A"}).pass);

    CHECK_THROWS_AS(no_signaling_check(xyy, trace_of("ghz_yyx"), {"c"}), ComparisonError);
    CHECK_THROWS_AS(no_signaling_check(z, z, {"a"}), ComparisonError);
    CHECK_THROWS_AS(no_signaling_check(z, trace_of("ghz_xxx"), {"a"}), ComparisonError);
    CHECK_THROWS_AS(no_signaling_check(z, x, {"nobody"}), LookupError);

    // a trace whose A outcomes moved with Bob's setting is caught
    auto lines = mutation::lines_of(x.header.dump() + "\n");
    for (const auto& l : x.events) lines.push_back(l);
    auto& out = mutation::line_of(lines, "M_A")["outcomes"];
    std::swap(out["+1"], out["-1"]);
    const auto bad = no_signaling_check(z, Trace::parse(mutation::text_of(lines)), {"a", "A"});
    CHECK_FALSE(bad.pass);
    CHECK(failed(bad, "partition", "M_A (a, A)"));
}

TEST_CASE("perfect correlations and their common cause")
{
    const auto epr = detect_perfect_correlations(trace_of("epr"));
    REQUIRE(epr.size() == 1);
    CHECK(epr[0].parties == std::vector<std::string>{"A", "B"});
    CHECK(epr[0].constraint == "ZZ=+1");
    CHECK(epr[0].meeting == "F");
    CHECK(epr[0].common_cause == std::optional<std::string>("S"));
    CHECK(epr[0].to_string() == "AB ZZ=+1 over M_A, M_B (seen at F), common cause: S");

    const auto ghz_run = run("ghz_xxx");
    const auto ghz = detect_perfect_correlations(Trace::from_run(ghz_run));
    REQUIRE(ghz.size() == 1);
    CHECK(ghz[0].parties == std::vector<std::string>{"A", "B", "C"});
    CHECK(ghz[0].meeting == "F_BC");
    CHECK(ghz[0].common_cause == std::optional<std::string>("S"));
    int product = 0;
    for (const auto& sm : ghz_run.summaries) {
        if (sm.event == "F_BC") product = sm.products.begin()->first;
    }
    CHECK(ghz[0].constraint == std::string("XXX=") + (product > 0 ? "+1" : "-1"));

    CHECK(detect_perfect_correlations(trace_of("independent")).empty());
    CHECK(detect_perfect_correlations(trace_of("epr_bob_x")).empty());
    CHECK(detect_perfect_correlations(trace_of("chsh")).empty());

    const auto x = detect_perfect_correlations(trace_of("epr_x"));
    REQUIRE(x.size() == 1);
    CHECK(x[0].constraint == "XX=+1");
}
