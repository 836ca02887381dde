#include "lworlds/correlations.hpp"

#include "lworlds/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lw::correlations {

using hilbert::complex;
using hilbert::Observable;
using hilbert::StateVector;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

void CorrelationSpec::normalize()
{
    if (subsystems.empty()) {
        subsystems = parties;
    }
    if (settings.empty()) {
        settings.resize(parties.size());
        for (const auto& c : constraints) {
            if (c.settings.size() != parties.size()) {
                throw DomainError("constraint " + describe(c) + " needs one setting per party");
            }
            for (std::size_t p = 0; p < parties.size(); ++p) {
                auto& alphabet = settings[p];
                if (std::find(alphabet.begin(), alphabet.end(), c.settings[p]) == alphabet.end()) {
                    alphabet.push_back(c.settings[p]);
                }
            }
        }
        for (auto& alphabet : settings) {
            std::sort(alphabet.begin(), alphabet.end());
        }
    }
    validate();
}

void CorrelationSpec::validate() const
{
    if (parties.empty()) {
        throw DomainError("correlation spec has no parties");
    }
    if (std::set<std::string>(parties.begin(), parties.end()).size() != parties.size()) {
        throw DomainError("duplicate party");
    }
    if (subsystems.size() != parties.size() || settings.size() != parties.size()) {
        throw DomainError("subsystems and settings must list one entry per party");
    }
    for (std::size_t p = 0; p < parties.size(); ++p) {
        if (settings[p].empty()) {
            throw DomainError("party " + parties[p] + " has no settings");
        }
    }
    for (const auto& c : constraints) {
        if (c.settings.size() != parties.size()) {
            throw DomainError("constraint " + describe(c) + " needs one setting per party");
        }
        if (c.product != 1 && c.product != -1) {
            throw DomainError("required product must be +1 or -1");
        }
        for (std::size_t p = 0; p < parties.size(); ++p) {
            setting_index(p, c.settings[p]);
        }
    }
}

std::size_t CorrelationSpec::party_index(const std::string& party) const
{
    const auto it = std::find(parties.begin(), parties.end(), party);
    if (it == parties.end()) {
        throw LookupError("unknown party '" + party + "'");
    }
    return static_cast<std::size_t>(it - parties.begin());
}

std::size_t CorrelationSpec::setting_index(std::size_t party, const std::string& setting) const
{
    const auto& alphabet = settings.at(party);
    const auto it = std::find(alphabet.begin(), alphabet.end(), setting);
    if (it == alphabet.end()) {
        throw DomainError("setting '" + setting + "' not available to party " + parties.at(party));
    }
    return static_cast<std::size_t>(it - alphabet.begin());
}

std::string CorrelationSpec::settings_string(const std::vector<std::string>& settings)
{
    const bool letters = std::all_of(settings.begin(), settings.end(), [](const auto& s) { return s.size() == 1; });
    std::string out;
    for (std::size_t i = 0; i < settings.size(); ++i) {
        if (!letters && i > 0) {
            out += ',';
        }
        out += settings[i];
    }
    return out;
}

std::string CorrelationSpec::describe(const Constraint& c)
{
    return settings_string(c.settings) + (c.product > 0 ? "=+1" : "=-1");
}

Constraint CorrelationSpec::parse_constraint(const std::string& text, std::size_t parties)
{
    const auto eq = text.rfind('=');
    if (eq == std::string::npos) {
        throw ParseError("constraint '" + text + "' has no '='");
    }
    Constraint c;
    const auto lhs = text.substr(0, eq);
    const auto rhs = text.substr(eq + 1);
    if (rhs == "+1" || rhs == "1") {
        c.product = +1;
    } else if (rhs == "-1") {
        c.product = -1;
    } else {
        throw ParseError("constraint '" + text + "' must equal +1 or -1");
    }
    if (lhs.find(',') != std::string::npos) {
        std::stringstream ss(lhs);
        std::string item;
        while (std::getline(ss, item, ',')) {
            c.settings.push_back(item);
        }
    } else {
        for (char ch : lhs) {
            c.settings.emplace_back(1, ch);
        }
    }
    if (c.settings.size() != parties) {
        throw ParseError("constraint '" + text + "' needs " + std::to_string(parties) + " settings");
    }
    return c;
}

CorrelationSpec CorrelationSpec::parse(const std::string& text)
{
    CorrelationSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        spec.parties = j.at("parties").get<std::vector<std::string>>();
        spec.subsystems = j.value("subsystems", std::vector<std::string>{});
        spec.settings = j.value("settings", std::vector<std::vector<std::string>>{});
        for (const auto& c : j.at("constraints")) {
            if (c.is_string()) {
                spec.constraints.push_back(parse_constraint(c.get<std::string>(), spec.parties.size()));
            } else {
                spec.constraints.push_back({c.at("settings").get<std::vector<std::string>>(), c.at("product").get<int>()});
            }
        }
        spec.normalize();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("malformed spec: ") + ex.what());
    } catch (const DomainError& ex) {
        throw ParseError(std::string("invalid spec: ") + ex.what());
    } catch (const LookupError& ex) {
        throw ParseError(std::string("invalid spec: ") + ex.what());
    }
    return spec;
}

CorrelationSpec CorrelationSpec::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open spec file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

CorrelationSpec ghz_spec()
{
    CorrelationSpec spec;
    spec.parties = {"A", "B", "C"};
    spec.subsystems = {"a", "b", "c"};
    spec.settings = {{"X", "Y"}, {"X", "Y"}, {"X", "Y"}};
    spec.constraints = {
        {{"X", "X", "X"}, -1},
        {{"Y", "Y", "X"}, +1},
        {{"X", "Y", "Y"}, +1},
        {{"Y", "X", "Y"}, +1},
    };
    spec.validate();
    return spec;
}

CorrelationSpec epr_spec()
{
    CorrelationSpec spec;
    spec.parties = {"A", "B"};
    spec.subsystems = {"a", "b"};
    spec.settings = {{"Z"}, {"Z"}};
    spec.constraints = {{{"Z", "Z"}, +1}};
    spec.validate();
    return spec;
}

StateVector epr_state()
{
    return StateVector({"a", "b"}, {kInvSqrt2, 0.0, 0.0, -kInvSqrt2});
}

StateVector ghz_state()
{
    std::vector<complex> amps(8);
    amps[0] = kInvSqrt2;
    amps[7] = -kInvSqrt2;
    return StateVector({"a", "b", "c"}, std::move(amps));
}

StateVector singlet_state()
{
    return StateVector({"a", "b"}, {0.0, kInvSqrt2, -kInvSqrt2, 0.0});
}

StateVector measured_pair_state()
{
    const auto x = Observable::x();
    const auto [u0, u1] = x.eigenvector(+1);
    const auto [d0, d1] = x.eigenvector(-1);
    // label order a, A, b, B; pointer bit 0 records +1.
    std::vector<complex> amps(16);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const complex ua = a ? u1 : u0, ub = b ? u1 : u0;
            const complex da = a ? d1 : d0, db = b ? d1 : d0;
            amps[(a << 3) | (0 << 2) | (b << 1) | 0] += kInvSqrt2 * ua * ub;
            amps[(a << 3) | (1 << 2) | (b << 1) | 1] += kInvSqrt2 * da * db;
        }
    }
    return StateVector({"a", "A", "b", "B"}, std::move(amps));
}

CorrelationReport verify_spec(const StateVector& psi, const CorrelationSpec& spec)
{
    spec.validate();
    for (const auto& label : spec.subsystems) {
        if (!psi.has_label(label)) {
            throw LookupError("state has no subsystem '" + label + "'");
        }
    }
    CorrelationReport report;
    report.pass = true;
    for (const auto& c : spec.constraints) {
        std::vector<hilbert::Setting> settings;
        for (std::size_t p = 0; p < spec.parties.size(); ++p) {
            settings.emplace_back(spec.subsystems[p], Observable::parse(c.settings[p]));
        }
        const auto dist = hilbert::born_distribution(psi, settings);
        ConstraintResult r;
        r.constraint = c;
        for (const auto& e : dist.entries) {
            int product = 1;
            for (int v : e.values) {
                product *= v;
            }
            r.expectation += product * e.probability;
            if (product != c.product) {
                r.violating_probability += e.probability;
            }
        }
        r.satisfied = std::abs(r.expectation - c.product) < kExpectationTolerance &&
                      r.violating_probability < kSupportTolerance;
        report.pass = report.pass && r.satisfied;
        report.results.push_back(std::move(r));
    }
    return report;
}

Insufficiency reduced_state_insufficiency(const StateVector& psi,
                                          const std::vector<hilbert::Label>& left,
                                          const std::vector<hilbert::Label>& right,
                                          const StateVector& left_outcome,
                                          const StateVector& right_outcome)
{
    std::set<hilbert::Label> seen;
    for (const auto& l : left) {
        seen.insert(l);
    }
    for (const auto& l : right) {
        if (!seen.insert(l).second) {
            throw DomainError("partition halves overlap on '" + l + "'");
        }
    }
    const std::set<hilbert::Label> all(psi.labels().begin(), psi.labels().end());
    if (left.empty() || right.empty() || seen != all) {
        throw DomainError("partition must be a disjoint cover of the state's labels");
    }
    const auto rho_left = hilbert::partial_trace(psi, left);
    const auto rho_right = hilbert::partial_trace(psi, right);
    Insufficiency out;
    out.lhs = rho_left.expectation_of_projector(left_outcome) * rho_right.expectation_of_projector(right_outcome);
    out.rhs = hilbert::inner_product_norm2(psi, hilbert::tensor(left_outcome, right_outcome));
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

ChshSettings tsirelson_settings()
{
    return {Observable::parse("XZ:0"), Observable::parse("XZ:90"), Observable::parse("XZ:225"),
            Observable::parse("XZ:135")};
}

double chsh_value(const StateVector& psi, const ChshSettings& s)
{
    if (psi.qubit_count() != 2) {
        throw DomainError("CHSH needs a two-qubit state");
    }
    const auto& left = psi.labels()[0];
    const auto& right = psi.labels()[1];
    auto e = [&](const Observable& a, const Observable& b) {
        const std::vector<hilbert::Setting> product{{left, a}, {right, b}};
        return hilbert::expectation(psi, product);
    };
    return e(s.a, s.b) + e(s.a, s.b_prime) + e(s.a_prime, s.b) - e(s.a_prime, s.b_prime);
}

}  // namespace lw::correlations
