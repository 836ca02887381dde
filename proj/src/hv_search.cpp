#include "lworlds/hv_search.hpp"

#include "lworlds/errors.hpp"

#include <algorithm>
#include <bit>
#include <future>
#include <thread>

namespace lw::hv {

namespace {

struct Pair {
    std::size_t party;
    std::string setting;
};

std::vector<Pair> pairs_of(const CorrelationSpec& spec)
{
    std::vector<Pair> out;
    for (std::size_t p = 0; p < spec.parties.size(); ++p) {
        for (const auto& s : spec.settings[p]) {
            out.push_back({p, s});
        }
    }
    return out;
}

std::size_t pair_index(const CorrelationSpec& spec, std::size_t party, const std::string& setting)
{
    std::size_t base = 0;
    for (std::size_t p = 0; p < party; ++p) {
        base += spec.settings[p].size();
    }
    return base + spec.setting_index(party, setting);
}

/// Pair indices touched by each constraint, in party order.
std::vector<std::vector<std::size_t>> constraint_vars(const CorrelationSpec& spec)
{
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : spec.constraints) {
        std::vector<std::size_t> vars;
        for (std::size_t p = 0; p < spec.parties.size(); ++p) {
            vars.push_back(pair_index(spec, p, c.settings[p]));
        }
        out.push_back(std::move(vars));
    }
    return out;
}

bool odd(std::uint64_t x) { return std::popcount(x) & 1; }

int value_of_bit(std::uint64_t bits, std::size_t k) { return (bits >> k) & 1 ? -1 : +1; }

void absorb_witness(SearchReport& r, Assignment a)
{
    if (r.witnesses.size() < kWitnessLimit) {
        r.witnesses.push_back(std::move(a));
    }
    ++r.witness_count;
}

/// Splits [0, total) into ordered chunks, runs them concurrently and merges.
template <typename Fn>
SearchReport run_partitioned(std::uint64_t total, Fn fn)
{
    constexpr std::uint64_t kSerialLimit = 1u << 16;
    const std::uint64_t workers = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
    if (total <= kSerialLimit || workers == 1) {
        return fn(0, total);
    }
    const std::uint64_t chunks = workers * 4;
    std::vector<std::future<SearchReport>> parts;
    for (std::uint64_t k = 0; k < chunks; ++k) {
        const std::uint64_t b = total * k / chunks, e = total * (k + 1) / chunks;
        parts.push_back(std::async(std::launch::async, fn, b, e));
    }
    SearchReport out = parts.front().get();
    for (std::size_t k = 1; k < parts.size(); ++k) {
        out = merge(std::move(out), parts[k].get());
    }
    return out;
}

std::string sign_string(int v) { return v > 0 ? "+1" : "-1"; }

}  // namespace

const AssignmentCell& Assignment::at(const std::string& party, const std::string& setting) const
{
    for (const auto& c : cells) {
        if (c.party == party && c.setting == setting) {
            return c;
        }
    }
    throw LookupError("no cell for " + party + "." + setting);
}

std::vector<int> Assignment::values(const std::string& party, const std::string& setting) const
{
    std::vector<int> out;
    for (const auto& e : at(party, setting).entries) {
        out.push_back(e.value);
    }
    return out;
}

std::string Assignment::to_string() const
{
    std::string out;
    for (const auto& c : cells) {
        if (!out.empty()) {
            out += ' ';
        }
        out += c.party + "." + c.setting + "=";
        if (c.entries.size() == 1 && !c.entries[0].world) {
            out += sign_string(c.entries[0].value);
            continue;
        }
        const bool tagged = !c.entries.empty() && c.entries[0].world.has_value();
        out += tagged ? '(' : '{';
        for (std::size_t i = 0; i < c.entries.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += sign_string(c.entries[i].value);
            if (c.entries[i].world) {
                out += "^" + *c.entries[i].world;
            }
        }
        out += tagged ? ')' : '}';
    }
    return out;
}

SearchReport merge(SearchReport left, const SearchReport& right)
{
    left.satisfiable = left.satisfiable || right.satisfiable;
    for (const auto& w : right.witnesses) {
        if (left.witnesses.size() >= kWitnessLimit) {
            break;
        }
        left.witnesses.push_back(w);
    }
    left.witness_count += right.witness_count;
    left.total_searched += right.total_searched;
    if (right.closing) {
        if (!left.closing) {
            left.closing = right.closing;
        } else {
            left.closing->candidates += right.closing->candidates;
            for (std::size_t w = 0; w < left.closing->observed.size(); ++w) {
                auto& seen = left.closing->observed[w];
                for (int v : right.closing->observed[w]) {
                    if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
                        seen.push_back(v);
                    }
                }
                std::sort(seen.begin(), seen.end());
            }
        }
    }
    return left;
}

// ---------------------------------------------------------------------------
// Single world

SearchReport enumerate_single_world_range(const CorrelationSpec& spec, std::uint64_t begin, std::uint64_t end)
{
    spec.validate();
    const auto pairs = pairs_of(spec);
    if (pairs.size() > kMaxSingleWorldPairs) {
        throw SizeGuardError("spec has " + std::to_string(pairs.size()) + " (party, setting) pairs; limit is " +
                             std::to_string(kMaxSingleWorldPairs));
    }
    const auto vars = constraint_vars(spec);
    std::vector<std::uint64_t> masks;
    std::vector<bool> want_odd;
    for (std::size_t c = 0; c < vars.size(); ++c) {
        std::uint64_t m = 0;
        for (auto v : vars[c]) {
            m |= std::uint64_t{1} << v;
        }
        masks.push_back(m);
        want_odd.push_back(spec.constraints[c].product < 0);
    }
    end = std::min(end, std::uint64_t{1} << pairs.size());
    SearchReport r;
    for (std::uint64_t bits = begin; bits < end; ++bits) {
        bool ok = true;
        for (std::size_t c = 0; c < masks.size() && ok; ++c) {
            ok = odd(bits & masks[c]) == want_odd[c];
        }
        if (!ok) {
            continue;
        }
        r.satisfiable = true;
        if (r.witnesses.size() < kWitnessLimit) {
            Assignment a;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                a.cells.push_back({spec.parties[pairs[k].party], pairs[k].setting, {{value_of_bit(bits, k), {}}}});
            }
            r.witnesses.push_back(std::move(a));
        }
        ++r.witness_count;
    }
    r.total_searched = end > begin ? end - begin : 0;
    return r;
}

SearchReport enumerate_single_world(const CorrelationSpec& spec)
{
    spec.validate();
    const auto n = pairs_of(spec).size();
    if (n > kMaxSingleWorldPairs) {
        throw SizeGuardError("spec has " + std::to_string(n) + " (party, setting) pairs; limit is " +
                             std::to_string(kMaxSingleWorldPairs));
    }
    return run_partitioned(std::uint64_t{1} << n, [&spec](std::uint64_t b, std::uint64_t e) {
        return enumerate_single_world_range(spec, b, e);
    });
}

// ---------------------------------------------------------------------------
// Symbolic chain

namespace {

struct Mono {
    bool negative = false;
    std::uint64_t symbols = 0;

    Mono operator*(const Mono& o) const { return {negative != o.negative, symbols ^ o.symbols}; }
    bool operator==(const Mono&) const = default;
};

std::string symbol_name(std::size_t k)
{
    static const std::string letters = "lmnopqrstuvwxyzabcdefghijk";
    return k < letters.size() ? std::string(1, letters[k]) : "s" + std::to_string(k);
}

std::string mono_string(const Mono& m)
{
    std::string out = m.negative ? "-" : "";
    if (m.symbols == 0) {
        return out + "1";
    }
    for (std::size_t k = 0; k < 64; ++k) {
        if ((m.symbols >> k) & 1) {
            out += symbol_name(k);
        }
    }
    return out;
}

std::string var_name(const CorrelationSpec& spec, const Pair& p)
{
    return "λ_" + p.setting + "^" + spec.parties[p.party];
}

class Chain {
public:
    explicit Chain(const CorrelationSpec& spec)
        : spec_(spec), pairs_(pairs_of(spec)), vars_(constraint_vars(spec)), values_(pairs_.size()),
          closed_(spec.constraints.size(), false)
    {
    }

    ContradictionTrace run()
    {
        bool any_closure = false;
        for (;;) {
            if (auto c = find_closure()) {
                any_closure = true;
                if (close(*c)) {
                    return std::move(trace_);
                }
                continue;
            }
            if (auto c = find_single_unknown()) {
                derive(*c, unknowns(*c).front());
                continue;
            }
            if (auto c = find_open()) {
                const auto free = unknowns(*c);
                for (std::size_t i = 0; i + 1 < free.size(); ++i) {
                    fix(free[i]);
                }
                derive(*c, free.back());
                continue;
            }
            break;
        }
        if (any_closure) {
            trace_.status = TraceStatus::Consistent;
            trace_.conclusion = "chain closes consistently";
        } else {
            trace_.status = TraceStatus::NoChain;
            trace_.conclusion = "no symbolic chain";
        }
        return std::move(trace_);
    }

private:
    std::vector<std::size_t> unknowns(std::size_t c) const
    {
        std::vector<std::size_t> out;
        for (auto v : vars_[c]) {
            if (!values_[v]) {
                out.push_back(v);
            }
        }
        return out;
    }

    bool contains_anchor(std::size_t c) const
    {
        return anchor_ && std::find(vars_[c].begin(), vars_[c].end(), *anchor_) != vars_[c].end();
    }

    std::optional<std::size_t> find_closure() const
    {
        for (std::size_t c = 0; c < vars_.size(); ++c) {
            if (!closed_[c] && unknowns(c).empty()) {
                return c;
            }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> find_single_unknown() const
    {
        std::optional<std::size_t> fallback;
        for (std::size_t c = 0; c < vars_.size(); ++c) {
            if (closed_[c] || unknowns(c).size() != 1) {
                continue;
            }
            if (!contains_anchor(c)) {
                return c;
            }
            if (!fallback) {
                fallback = c;
            }
        }
        return fallback;
    }

    std::optional<std::size_t> find_open() const
    {
        for (std::size_t c = 0; c < vars_.size(); ++c) {
            if (!closed_[c]) {
                return c;
            }
        }
        return std::nullopt;
    }

    void fix(std::size_t v)
    {
        const Mono m{false, std::uint64_t{1} << next_symbol_++};
        values_[v] = m;
        if (!anchor_) {
            anchor_ = v;
        }
        order_.push_back(v);
        const auto name = var_name(spec_, pairs_[v]);
        trace_.steps.push_back({name, mono_string(m), name + " = " + mono_string(m), std::nullopt});
    }

    /// Value `target` must take for constraint c given the other variables.
    Mono forced(std::size_t c, std::size_t target, std::string& formula) const
    {
        Mono m{spec_.constraints[c].product < 0, 0};
        formula = m.negative ? "-" : "";
        bool first = true;
        for (auto v : vars_[c]) {
            if (v == target) {
                continue;
            }
            m = m * *values_[v];
            formula += (first ? "" : " ") + var_name(spec_, pairs_[v]);
            first = false;
        }
        if (first) {
            formula += "1";
        }
        return m;
    }

    std::string citation(std::size_t c) const
    {
        return " [from " + CorrelationSpec::describe(spec_.constraints[c]) + "]";
    }

    void derive(std::size_t c, std::size_t v)
    {
        std::string formula;
        const Mono m = forced(c, v, formula);
        values_[v] = m;
        order_.push_back(v);
        closed_[c] = true;
        const auto name = var_name(spec_, pairs_[v]);
        trace_.steps.push_back({name, mono_string(m), name + " = " + formula + " = " + mono_string(m) + citation(c), c});
    }

    /// Returns true on contradiction.
    bool close(std::size_t c)
    {
        closed_[c] = true;
        std::size_t target = vars_[c].front();
        if (contains_anchor(c)) {
            target = *anchor_;
        } else {
            std::size_t best = order_.size();
            for (auto v : vars_[c]) {
                const auto pos = static_cast<std::size_t>(std::find(order_.begin(), order_.end(), v) - order_.begin());
                if (pos < best) {
                    best = pos;
                    target = v;
                }
            }
        }
        std::string formula;
        const Mono derived = forced(c, target, formula);
        const Mono current = *values_[target];
        const Mono ratio = derived * current;
        const auto name = var_name(spec_, pairs_[target]);
        std::string text = name + " = " + formula + " = " + mono_string(derived) + citation(c);
        if (ratio.symbols == 0 && ratio.negative) {
            const std::string conclusion =
                name + " = " + mono_string(derived) + " contradicts " + name + " = " + mono_string(current);
            trace_.steps.push_back({name, mono_string(derived), text + "; contradicts " + mono_string(current), c});
            trace_.status = TraceStatus::Contradiction;
            trace_.conclusion = conclusion;
            return true;
        }
        if (ratio.symbols == 0) {
            trace_.steps.push_back({name, mono_string(derived), text + "; consistent", c});
            return false;
        }
        // The closure ties symbols together: eliminate the highest one.
        const std::size_t s = 63 - static_cast<std::size_t>(std::countl_zero(ratio.symbols));
        const Mono replacement{ratio.negative, ratio.symbols ^ (std::uint64_t{1} << s)};
        trace_.steps.push_back({name, mono_string(derived),
                                text + "; requires " + symbol_name(s) + " = " + mono_string(replacement), c});
        for (auto& val : values_) {
            if (val && ((val->symbols >> s) & 1)) {
                *val = Mono{val->negative, val->symbols ^ (std::uint64_t{1} << s)} * replacement;
            }
        }
        return false;
    }

    const CorrelationSpec& spec_;
    std::vector<Pair> pairs_;
    std::vector<std::vector<std::size_t>> vars_;
    std::vector<std::optional<Mono>> values_;
    std::vector<bool> closed_;
    std::vector<std::size_t> order_;
    std::optional<std::size_t> anchor_;
    std::size_t next_symbol_ = 0;
    ContradictionTrace trace_;
};

}  // namespace

std::string ContradictionTrace::to_string() const
{
    std::string out;
    for (const auto& s : steps) {
        out += s.text + "\n";
    }
    return out + conclusion + "\n";
}

ContradictionTrace derive_contradiction_trace(const CorrelationSpec& spec)
{
    spec.validate();
    if (pairs_of(spec).size() > 64) {
        throw SizeGuardError("too many (party, setting) pairs for a symbolic chain");
    }
    return Chain(spec).run();
}

// ---------------------------------------------------------------------------
// Divergent worlds

std::vector<std::vector<int>> satisfying_combinations(const CorrelationSpec& spec, std::size_t index)
{
    const auto& c = spec.constraints.at(index);
    const std::size_t n = c.settings.size();
    std::vector<std::vector<int>> out;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        std::vector<int> combo(n);
        int product = 1;
        for (std::size_t k = 0; k < n; ++k) {
            // first party is the most significant digit so +1 leads lexicographically
            combo[k] = value_of_bit(bits, n - 1 - k);
            product *= combo[k];
        }
        if (product == c.product) {
            out.push_back(std::move(combo));
        }
    }
    return out;
}

SearchReport enumerate_divergent_worlds(const CorrelationSpec& spec, std::size_t world_count,
                                        const DivergentOptions& options)
{
    spec.validate();
    if (world_count == 0) {
        throw DomainError("world count must be at least 1");
    }
    if (world_count == 1) {
        return enumerate_single_world(spec);
    }
    const auto pairs = pairs_of(spec);
    const auto vars = constraint_vars(spec);
    const std::size_t W = world_count;
    const std::size_t V = pairs.size();
    if (V * W > 64) {
        throw SizeGuardError("world-indexed table exceeds 64 bits");
    }

    std::uint64_t fixed = 0;
    std::vector<bool> anchored(V, false);
    if (options.matching == WorldMatching::Anchor) {
        if (options.anchor >= spec.constraints.size()) {
            throw DomainError("anchor constraint index out of range");
        }
        const auto combos = satisfying_combinations(spec, options.anchor);
        if (combos.size() != W) {
            throw DomainError("world count " + std::to_string(W) + " inconsistent with anchor " +
                              CorrelationSpec::describe(spec.constraints[options.anchor]) + " which has " +
                              std::to_string(combos.size()) + " satisfying combinations");
        }
        for (std::size_t p = 0; p < vars[options.anchor].size(); ++p) {
            const auto v = vars[options.anchor][p];
            anchored[v] = true;
            for (std::size_t w = 0; w < W; ++w) {
                if (combos[w][p] < 0) {
                    fixed |= std::uint64_t{1} << (v * W + w);
                }
            }
        }
    }
    std::vector<std::size_t> free_positions;
    for (std::size_t v = 0; v < V; ++v) {
        if (!anchored[v]) {
            for (std::size_t w = 0; w < W; ++w) {
                free_positions.push_back(v * W + w);
            }
        }
    }
    if (free_positions.size() > kMaxDivergentBits) {
        throw SizeGuardError("divergent search needs 2^" + std::to_string(free_positions.size()) +
                             " tables; limit is 2^" + std::to_string(kMaxDivergentBits));
    }

    // masks[c][w]: bits of constraint c's variables in world w
    std::vector<std::vector<std::uint64_t>> masks(vars.size(), std::vector<std::uint64_t>(W, 0));
    for (std::size_t c = 0; c < vars.size(); ++c) {
        for (auto v : vars[c]) {
            for (std::size_t w = 0; w < W; ++w) {
                masks[c][w] |= std::uint64_t{1} << (v * W + w);
            }
        }
    }
    const std::size_t closing = options.closing.value_or(spec.constraints.empty() ? 0 : spec.constraints.size() - 1);
    const bool instrument = closing < spec.constraints.size();
    std::vector<std::string> tags;
    for (std::size_t w = 0; w < W; ++w) {
        tags.push_back("w" + std::to_string(w + 1));
    }

    auto chunk = [&](std::uint64_t begin, std::uint64_t end) {
        SearchReport r;
        std::vector<unsigned> seen(W, 0);  // bit0: +1 seen, bit1: -1 seen
        std::uint64_t candidates = 0;
        for (std::uint64_t idx = begin; idx < end; ++idx) {
            std::uint64_t bits = fixed;
            for (std::size_t j = 0; j < free_positions.size(); ++j) {
                if ((idx >> j) & 1) {
                    bits |= std::uint64_t{1} << free_positions[j];
                }
            }
            bool others_ok = true;
            bool closing_ok = true;
            for (std::size_t c = 0; c < masks.size() && others_ok; ++c) {
                const bool want_odd = spec.constraints[c].product < 0;
                for (std::size_t w = 0; w < W; ++w) {
                    if (odd(bits & masks[c][w]) != want_odd) {
                        if (instrument && c == closing) {
                            closing_ok = false;
                        } else {
                            others_ok = false;
                            break;
                        }
                    }
                }
            }
            if (!others_ok) {
                continue;
            }
            if (instrument) {
                ++candidates;
                for (std::size_t w = 0; w < W; ++w) {
                    seen[w] |= odd(bits & masks[closing][w]) ? 2u : 1u;
                }
            }
            if (!closing_ok) {
                continue;
            }
            r.satisfiable = true;
            if (r.witnesses.size() < kWitnessLimit) {
                Assignment a;
                for (std::size_t v = 0; v < V; ++v) {
                    AssignmentCell cell{spec.parties[pairs[v].party], pairs[v].setting, {}};
                    for (std::size_t w = 0; w < W; ++w) {
                        cell.entries.push_back({value_of_bit(bits, v * W + w), tags[w]});
                    }
                    a.cells.push_back(std::move(cell));
                }
                r.witnesses.push_back(std::move(a));
            }
            ++r.witness_count;
        }
        r.total_searched = end - begin;
        if (instrument) {
            ClosingProducts cp;
            cp.constraint = closing;
            cp.candidates = candidates;
            cp.observed.resize(W);
            for (std::size_t w = 0; w < W; ++w) {
                if (seen[w] & 2u) cp.observed[w].push_back(-1);
                if (seen[w] & 1u) cp.observed[w].push_back(+1);
            }
            r.closing = std::move(cp);
        }
        return r;
    };
    auto report = run_partitioned(std::uint64_t{1} << free_positions.size(), chunk);
    report.world_tags = tags;
    return report;
}

// ---------------------------------------------------------------------------
// Multivalued witnesses

namespace {

// Set codes: 1 = {+1}, 2 = {-1}, 3 = {+1, -1}.
constexpr unsigned kCodes[3] = {1u, 2u, 3u};

unsigned code_for(int value) { return value > 0 ? 1u : 2u; }

std::vector<int> set_values(unsigned code)
{
    std::vector<int> out;
    if (code & 1u) out.push_back(+1);
    if (code & 2u) out.push_back(-1);
    return out;
}

/// Every outcome combination drawable from the sets of `vars`.
template <typename Fn>
void for_each_combination(const std::vector<std::size_t>& vars, const std::vector<unsigned>& sets, Fn fn)
{
    std::vector<std::vector<int>> options;
    for (auto v : vars) {
        options.push_back(set_values(sets[v]));
    }
    std::vector<std::size_t> pos(vars.size(), 0);
    std::vector<int> combo(vars.size());
    for (;;) {
        for (std::size_t k = 0; k < vars.size(); ++k) {
            combo[k] = options[k][pos[k]];
        }
        fn(combo);
        std::size_t k = vars.size();
        while (k > 0) {
            --k;
            if (++pos[k] < options[k].size()) {
                break;
            }
            pos[k] = 0;
            if (k == 0) {
                return;
            }
        }
        if (vars.empty()) {
            return;
        }
    }
}

bool closed_under(const std::vector<std::vector<std::size_t>>& vars, const CorrelationSpec& spec,
                  const std::vector<unsigned>& sets)
{
    for (std::size_t c = 0; c < vars.size(); ++c) {
        for (std::size_t p = 0; p < vars[c].size(); ++p) {
            std::vector<std::size_t> others;
            for (std::size_t q = 0; q < vars[c].size(); ++q) {
                if (q != p) {
                    others.push_back(vars[c][q]);
                }
            }
            bool ok = true;
            for_each_combination(others, sets, [&](const std::vector<int>& combo) {
                int forced = spec.constraints[c].product;
                for (int v : combo) {
                    forced *= v;
                }
                ok = ok && (sets[vars[c][p]] & code_for(forced));
            });
            if (!ok) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

SearchReport many_worlds_witness(const CorrelationSpec& spec, const MultivaluedOptions& options)
{
    spec.validate();
    const auto pairs = pairs_of(spec);
    const std::size_t V = pairs.size();
    if (V > kMaxMultivaluedPairs) {
        throw SizeGuardError("multivalued search supports at most " + std::to_string(kMaxMultivaluedPairs) +
                             " (party, setting) pairs");
    }
    const auto vars = constraint_vars(spec);
    std::vector<bool> must_split(V, false);
    if (options.require_uncertain_marginals) {
        for (const auto& vs : vars) {
            if (vs.size() >= 2) {
                for (auto v : vs) {
                    must_split[v] = true;
                }
            }
        }
    }

    std::uint64_t total = 1;
    for (std::size_t v = 0; v < V; ++v) {
        total *= 3;
    }
    SearchReport r;
    r.total_searched = total;
    std::size_t best = V * 2 + 1;
    std::vector<unsigned> sets(V);
    std::vector<unsigned> first;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        std::size_t cardinality = 0;
        bool allowed = true;
        // last pair is the fastest digit
        for (std::size_t k = V; k-- > 0;) {
            sets[k] = kCodes[rest % 3];
            rest /= 3;
            cardinality += sets[k] == 3u ? 2 : 1;
            allowed = allowed && (!must_split[k] || sets[k] == 3u);
        }
        if (!allowed || cardinality > best || !closed_under(vars, spec, sets)) {
            continue;
        }
        if (cardinality < best) {
            best = cardinality;
            r.witnesses.clear();
            r.witness_count = 0;
            first = sets;
        }
        Assignment a;
        for (std::size_t v = 0; v < V; ++v) {
            AssignmentCell cell{spec.parties[pairs[v].party], pairs[v].setting, {}};
            for (int value : set_values(sets[v])) {
                cell.entries.push_back({value, std::nullopt});
            }
            a.cells.push_back(std::move(cell));
        }
        absorb_witness(r, std::move(a));
    }
    r.satisfiable = r.witness_count > 0;
    if (r.satisfiable) {
        for (std::size_t c = 0; c < vars.size(); ++c) {
            Pairing pairing{c, {}};
            for_each_combination(vars[c], first, [&](const std::vector<int>& combo) {
                int product = 1;
                for (int v : combo) {
                    product *= v;
                }
                if (product == spec.constraints[c].product) {
                    pairing.combinations.push_back(combo);
                }
            });
            r.pairings.push_back(std::move(pairing));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

int chsh_strategy_value(int a, int a_prime, int b, int b_prime)
{
    return a * b + a * b_prime + a_prime * b - a_prime * b_prime;
}

double chsh_classical_bound()
{
    int best = -4;
    for (unsigned bits = 0; bits < 16; ++bits) {
        const int a = value_of_bit(bits, 3), ap = value_of_bit(bits, 2);
        const int b = value_of_bit(bits, 1), bp = value_of_bit(bits, 0);
        best = std::max(best, chsh_strategy_value(a, ap, b, bp));
    }
    return best;
}

}  // namespace lw::hv
