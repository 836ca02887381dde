#include "cli.hpp"

#include "lworlds/audit.hpp"
#include "lworlds/errors.hpp"
#include "lworlds/hv_search.hpp"
#include "lworlds/spacetime.hpp"
#include "lworlds/worlds.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace lw::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string scenario;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    std::string spec;
    std::string mode = "single-world";
    std::size_t worlds = 4;
    std::size_t anchor = 0;
    std::optional<std::size_t> closing;
    bool unanchored = false;
    bool allow_definite = false;
    std::size_t show = 3;

    std::string trace;
    bool correlations = false;

    std::string trace_a;
    std::string trace_b;
    std::vector<std::string> local;

    double v = 0.5;
    std::size_t depth = 6;
    std::optional<double> floor;
    double trigger = 1.0;
    double separation = 1.0;
};

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + path.string() + "'");
    f << text;
}

int cmd_run(const Options& o, std::ostream& out)
{
    auto s = worlds::Scenario::load(o.scenario);
    if (o.n) s.n = *o.n;
    if (o.seed) s.seed = *o.seed;
    const auto r = worlds::run_scenario(s);

    fs::path dir = o.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutEnv);
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    const auto trace_path = dir / (s.name + ".trace.jsonl");
    const auto stats_path = dir / (s.name + ".stats.csv");
    write_file(trace_path, r.trace_text());
    write_file(stats_path, r.stats_csv());

    out << "scenario: " << s.name << " (n=" << s.n << ", seed=" << s.seed << ")\n";
    out << "trace: " << trace_path.string() << "\n";
    out << "stats: " << stats_path.string() << "\n";
    for (const auto& row : r.stats) {
        out << "  " << row.event << " " << row.key << " " << row.outcome << ": " << row.count << "\n";
    }
    for (const auto& sm : r.summaries) out << sm.to_string() << "\n";
    return kOk;
}

int cmd_hv_search(const Options& o, std::ostream& out)
{
    const auto spec = correlations::CorrelationSpec::load(o.spec);
    out << "spec: " << o.spec << "\n";
    out << "constraints:";
    for (const auto& c : spec.constraints) out << " " << correlations::CorrelationSpec::describe(c);
    out << "\nmode: " << o.mode << "\n";

    hv::SearchReport r;
    if (o.mode == "single-world") {
        r = hv::enumerate_single_world(spec);
        if (!r.trace) r.trace = hv::derive_contradiction_trace(spec);
    } else if (o.mode == "divergent") {
        hv::DivergentOptions opts;
        opts.matching = o.unanchored ? hv::WorldMatching::Unanchored : hv::WorldMatching::Anchor;
        opts.anchor = o.anchor;
        opts.closing = o.closing;
        out << "worlds: " << o.worlds << "\n";
        r = hv::enumerate_divergent_worlds(spec, o.worlds, opts);
    } else {
        hv::MultivaluedOptions opts;
        opts.require_uncertain_marginals = !o.allow_definite;
        r = hv::many_worlds_witness(spec, opts);
    }

    out << "result: " << (r.satisfiable ? "SAT" : "UNSAT") << ", " << r.total_searched << " searched\n";
    out << "witnesses: " << r.witness_count << "\n";
    for (std::size_t i = 0; i < r.witnesses.size() && i < o.show; ++i) {
        out << "witness: " << r.witnesses[i].to_string() << "\n";
    }
    if (!r.world_tags.empty()) {
        out << "world tags:";
        for (const auto& t : r.world_tags) out << " " << t;
        out << "\n";
    }
    if (r.closing) {
        const auto& c = *r.closing;
        out << "closing " << correlations::CorrelationSpec::describe(spec.constraints[c.constraint]) << " over "
            << c.candidates << " candidates:";
        for (std::size_t w = 0; w < c.observed.size(); ++w) {
            out << " " << (w < r.world_tags.size() ? r.world_tags[w] : "w" + std::to_string(w + 1)) << "={";
            for (std::size_t k = 0; k < c.observed[w].size(); ++k) {
                out << (k ? "," : "") << (c.observed[w][k] > 0 ? "+1" : "-1");
            }
            out << "}";
        }
        out << "\n";
    }
    for (const auto& p : r.pairings) {
        out << "pairing " << correlations::CorrelationSpec::describe(spec.constraints[p.constraint]) << ":";
        for (const auto& combo : p.combinations) {
            out << " (";
            for (std::size_t k = 0; k < combo.size(); ++k) out << (k ? "," : "") << (combo[k] > 0 ? "+1" : "-1");
            out << ")";
        }
        out << "\n";
    }
    if (r.trace) out << r.trace->to_string();
    return kOk;
}

int cmd_audit(const Options& o, std::ostream& out)
{
    const auto trace = audit::Trace::load(o.trace);
    const auto report = audit::locality_audit(trace);
    out << "trace: " << o.trace << " (scenario " << trace.scenario.name << ")\n";
    for (const auto& c : report.checks) {
        if (!c.pass) out << "FAIL " << c.id << " at " << c.subject << ": " << c.detail << "\n";
    }
    out << "audit: " << (report.pass ? "pass" : "fail") << " (" << report.checks.size() << " checks, "
        << report.failures().size() << " failed)\n";
    if (o.correlations) {
        const auto found = audit::detect_perfect_correlations(trace);
        if (found.empty()) out << "perfect correlations: none\n";
        for (const auto& pc : found) out << "perfect correlation: " << pc.to_string() << "\n";
    }
    return report.pass ? kOk : kFail;
}

int cmd_no_signaling(const Options& o, std::ostream& out)
{
    const auto a = audit::Trace::load(o.trace_a);
    const auto b = audit::Trace::load(o.trace_b);
    const auto report = audit::no_signaling_check(a, b, o.local);
    for (const auto& c : report.checks) {
        out << (c.pass ? "same " : "DIFFERENT ") << c.id << " at " << c.subject;
        if (!c.detail.empty()) out << ": " << c.detail;
        out << "\n";
    }
    out << "no-signaling: " << (report.pass ? "pass" : "fail") << "\n";
    return report.pass ? kOk : kFail;
}

int cmd_demo_cascade(const Options& o, std::ostream& out)
{
    const spacetime::Worldline one{0.0, 0.0, 0.0};
    const spacetime::Worldline two{o.separation, o.v, 0.0};
    const auto c = spacetime::branching_cascade(one, two, o.trigger, {o.depth, o.floor});
    out << "object 1 at rest at x=0, object 2 at x=" << o.separation << "+" << o.v << "t, trigger at t=" << o.trigger
        << "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s %-6s %-8s %12s %12s %12s %12s\n", "event", "object", "frame", "t", "x", "t_S",
                  "t_S'");
    out << buf;
    for (const auto& st : c.steps) {
        std::snprintf(buf, sizeof buf, "%-6s %-6d %-8s %12.6f %12.6f %12.6f %12.6f\n", st.event.id.c_str(), st.object,
                      st.frame.c_str(), st.event.t, st.event.x, st.t_s, st.t_s_prime);
        out << buf;
    }
    if (c.degenerate) out << "degenerate: both objects share a rest frame, no regress\n";
    if (c.floor_reached) out << "stopped at the time floor\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Local-worlds simulator, hidden-variable searches and trace audits", "lworlds"};
    app.require_subcommand(1);
    Options o;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its trace and statistics");
    run_cmd->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--n", o.n, "Lives per system")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", o.seed, "Seed for random settings");
    run_cmd->add_option("--out", o.out_dir, std::string("Output directory (default $") + kOutEnv + " or .)");

    auto* hv_cmd = app.add_subcommand("hv-search", "Exhaustive hidden-variable search over a correlation spec");
    hv_cmd->add_option("--spec", o.spec, "Spec file")->required()->check(CLI::ExistingFile);
    hv_cmd->add_option("--mode", o.mode, "single-world, divergent or multivalued")
        ->check(CLI::IsMember({"single-world", "divergent", "multivalued"}));
    hv_cmd->add_option("--worlds", o.worlds, "World count for divergent mode")->check(CLI::PositiveNumber);
    hv_cmd->add_option("--anchor", o.anchor, "Anchor constraint index");
    hv_cmd->add_option("--closing", o.closing, "Constraint whose per-world products are reported");
    hv_cmd->add_flag("--unanchored", o.unanchored, "Let every world vector vary freely");
    hv_cmd->add_flag("--allow-definite", o.allow_definite, "Multivalued mode: allow single-valued pairs");
    hv_cmd->add_option("--show", o.show, "Witnesses to print");

    auto* audit_cmd = app.add_subcommand("audit", "Audit a trace for locality");
    audit_cmd->add_option("--trace", o.trace, "Trace file")->required();
    audit_cmd->add_flag("--correlations", o.correlations, "Also list perfect correlations and common causes");

    auto* ns_cmd = app.add_subcommand("no-signaling", "Compare two traces differing in one remote setting");
    ns_cmd->add_option("--trace-a", o.trace_a, "First trace")->required();
    ns_cmd->add_option("--trace-b", o.trace_b, "Second trace")->required();
    ns_cmd->add_option("--local", o.local, "Local systems")->required();

    auto* cascade_cmd = app.add_subcommand("demo-cascade", "Print the alternating-simultaneity cascade");
    cascade_cmd->add_option("--v", o.v, "Velocity of object 2");
    cascade_cmd->add_option("--depth", o.depth, "Number of events")->check(CLI::PositiveNumber);
    cascade_cmd->add_option("--floor", o.floor, "Stop below this lab time");
    cascade_cmd->add_option("--trigger", o.trigger, "Lab time of the triggering event");
    cascade_cmd->add_option("--separation", o.separation, "Initial position of object 2");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(o, out);
        if (hv_cmd->parsed()) return cmd_hv_search(o, out);
        if (audit_cmd->parsed()) return cmd_audit(o, out);
        if (ns_cmd->parsed()) return cmd_no_signaling(o, out);
        return cmd_demo_cascade(o, out);
    } catch (const SizeGuardError& e) {
        err << "size guard: " << e.what() << "\n";
        return kFail;
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << "\n";
        return kUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "file error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace lw::cli
