#include "doctest.h"

#include "lworlds/correlations.hpp"
#include "lworlds/errors.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace lw;
using namespace lw::correlations;
using hilbert::complex;
using hilbert::Observable;
using hilbert::StateVector;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector up(const std::string& l) { return StateVector::basis(l, 0); }

StateVector eigen_qubit(const std::string& label, const Observable& o, int value)
{
    const auto [c0, c1] = o.eigenvector(value);
    return StateVector::from_qubit(label, c0, c1);
}

}  // namespace

TEST_CASE("epr state: ZZ perfect correlation and y-basis rewrite")
{
    const auto epr = epr_state();
    CHECK(std::abs(epr.norm() - 1.0) < 1e-15);
    const std::vector<hilbert::Setting> zz{{"a", Observable::z()}, {"b", Observable::z()}};
    CHECK(hilbert::expectation(epr, zz) == doctest::Approx(1.0).epsilon(1e-12));

    // Coefficients on (up_y up_y, up_y down_y, down_y up_y, down_y down_y).
    const std::vector<hilbert::Setting> yy{{"a", Observable::y()}, {"b", Observable::y()}};
    const auto coeff = hilbert::basis_coefficients(epr, yy);
    CHECK(std::abs(coeff[0] - complex(kInvSqrt2)) < 1e-12);
    CHECK(std::abs(coeff[1]) < 1e-12);
    CHECK(std::abs(coeff[2]) < 1e-12);
    CHECK(std::abs(coeff[3] - complex(-kInvSqrt2)) < 1e-12);

    // Rebuild the vector from the y-form and compare everything measurable.
    const auto y = Observable::y();
    const auto uu = hilbert::tensor(eigen_qubit("a", y, +1), eigen_qubit("b", y, +1));
    const auto dd = hilbert::tensor(eigen_qubit("a", y, -1), eigen_qubit("b", y, -1));
    std::vector<complex> amps(4);
    for (std::size_t i = 0; i < 4; ++i) amps[i] = kInvSqrt2 * (uu.amplitudes()[i] - dd.amplitudes()[i]);
    const StateVector from_y({"a", "b"}, amps);
    CHECK(from_y.approx_equal(epr));

    const Observable obs[] = {Observable::x(), Observable::y(), Observable::z(), Observable::parse("XZ:33")};
    for (const auto& oa : obs)
        for (const auto& ob : obs) {
            const std::vector<hilbert::Setting> s{{"a", oa}, {"b", ob}};
            CHECK(std::abs(hilbert::expectation(epr, s) - hilbert::expectation(from_y, s)) < 1e-12);
        }
}

TEST_CASE("ghz state satisfies the four constraints with perfect support")
{
    const auto ghz = ghz_state();
    const auto report = verify_spec(ghz, ghz_spec());
    CHECK(report.pass);
    REQUIRE(report.results.size() == 4);
    CHECK(report.results[0].expectation == doctest::Approx(-1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < 4; ++i) CHECK(report.results[i].expectation == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : report.results) CHECK(r.violating_probability < 1e-12);

    // ZZZ oracle from projector expansion: P(+++) = P(---) = 1/2 -> E = 0.
    const auto brute = oracle::brute_force_distribution(
        std::vector<oracle::cplx>(ghz.amplitudes().begin(), ghz.amplitudes().end()),
        {oracle::pauli('Z'), oracle::pauli('Z'), oracle::pauli('Z')});
    CHECK(brute[0] == doctest::Approx(0.5));
    CHECK(brute[7] == doctest::Approx(0.5));
    const std::vector<hilbert::Setting> zzz{{"a", Observable::z()}, {"b", Observable::z()}, {"c", Observable::z()}};
    CHECK(std::abs(hilbert::expectation(ghz, zzz) - 0.0) < 1e-12);
}

TEST_CASE("verify_spec: EPR passes, product state fails on XXX")
{
    CHECK(verify_spec(epr_state(), epr_spec()).pass);

    const auto product = hilbert::tensor(hilbert::tensor(up("a"), up("b")), up("c"));
    const auto report = verify_spec(product, ghz_spec());
    CHECK_FALSE(report.pass);
    CHECK_FALSE(report.results[0].satisfied);
    // oracle: <000|XXX|000> = 0
    CHECK(std::abs(report.results[0].expectation) < 1e-12);

    auto bad = ghz_spec();
    bad.subsystems = {"a", "b", "q"};
    CHECK_THROWS_AS(verify_spec(ghz_state(), bad), LookupError);
}

TEST_CASE("spec normalization defaults alphabets from constraints")
{
    CorrelationSpec spec;
    spec.parties = {"A", "B"};
    spec.constraints = {{{"Z", "Z"}, +1}, {{"X", "Z"}, -1}};
    spec.normalize();
    CHECK(spec.subsystems == std::vector<std::string>{"A", "B"});
    CHECK(spec.settings[0] == std::vector<std::string>{"X", "Z"});
    CHECK(spec.settings[1] == std::vector<std::string>{"Z"});

    CorrelationSpec broken = spec;
    broken.constraints.push_back({{"Z"}, +1});
    CHECK_THROWS_AS(broken.validate(), DomainError);
    broken.constraints.back() = {{"Z", "Z"}, 0};
    CHECK_THROWS_AS(broken.validate(), DomainError);
    CHECK(CorrelationSpec::describe(spec.constraints[1]) == "XZ=-1");
}

TEST_CASE("reduced state insufficiency")
{
    const auto x = Observable::x();
    // Measured-pair record state: partition {a, A} | {b, B}, both projectors on the up branch.
    const auto left_up = hilbert::tensor(eigen_qubit("a", x, +1), up("A"));
    const auto right_up = hilbert::tensor(eigen_qubit("b", x, +1), up("B"));
    const auto r = reduced_state_insufficiency(measured_pair_state(), {"a", "A"}, {"b", "B"}, left_up, right_up);
    CHECK(std::abs(r.lhs - 0.25) < 1e-12);
    CHECK(std::abs(r.rhs - 0.5) < 1e-12);
    CHECK(std::abs(r.gap - 0.25) < 1e-12);

    // The reduced state is maximally mixed over the two correlated branches.
    const auto rho = hilbert::partial_trace(measured_pair_state(), std::vector<hilbert::Label>{"a", "A"});
    const auto left_down = hilbert::tensor(eigen_qubit("a", x, -1), StateVector::basis("A", 1));
    CHECK(std::abs(rho.expectation_of_projector(left_up) - 0.5) < 1e-12);
    CHECK(std::abs(rho.expectation_of_projector(left_down) - 0.5) < 1e-12);

    const auto epr = reduced_state_insufficiency(epr_state(), {"a"}, {"b"}, up("a"), up("b"));
    CHECK(std::abs(epr.lhs - 0.25) < 1e-12);
    CHECK(std::abs(epr.rhs - 0.5) < 1e-12);

    CHECK_THROWS_AS(reduced_state_insufficiency(epr_state(), {"a"}, {"a"}, up("a"), up("a")), DomainError);
    CHECK_THROWS_AS(reduced_state_insufficiency(epr_state(), {"a"}, {}, up("a"), up("b")), DomainError);
}

TEST_CASE("property: product states show no insufficiency gap")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto l = oracle::random_state(rng, 1);
        const auto r = oracle::random_state(rng, 2);
        const StateVector left({"a"}, {l[0], l[1]});
        const StateVector right({"b", "c"}, std::vector<complex>(r.begin(), r.end()));
        const auto pl = oracle::random_state(rng, 1);
        const auto pr = oracle::random_state(rng, 2);
        const auto res = reduced_state_insufficiency(hilbert::tensor(left, right), {"a"}, {"b", "c"},
                                                     StateVector({"a"}, {pl[0], pl[1]}),
                                                     StateVector({"b", "c"}, std::vector<complex>(pr.begin(), pr.end())));
        CHECK(res.gap < 1e-12);
    }
}

TEST_CASE("chsh values")
{
    const double s = chsh_value(singlet_state(), tsirelson_settings());
    CHECK(std::abs(s - 2.0 * std::sqrt(2.0)) < 1e-9);

    const auto z = Observable::z();
    const auto x = Observable::x();
    const ChshSettings same{x, x, x, x};
    const double e = hilbert::expectation(singlet_state(), std::vector<hilbert::Setting>{{"a", x}, {"b", x}});
    CHECK(std::abs(chsh_value(singlet_state(), same) - 2.0 * e) < 1e-12);
    CHECK(std::abs(chsh_value(singlet_state(), same)) <= 2.0 + 1e-12);

    const auto product = hilbert::tensor(up("a"), up("b"));
    CHECK(std::abs(chsh_value(product, ChshSettings{z, z, z, z}) - 2.0) < 1e-12);

    CHECK_THROWS_AS(chsh_value(ghz_state(), tsirelson_settings()), DomainError);
}

TEST_CASE("spec files")
{
    const std::string dir = std::string(LW_SOURCE_DIR) + "/specs/";
    const auto ghz = CorrelationSpec::load(dir + "ghz.spec");
    const auto builtin = ghz_spec();
    CHECK(ghz.parties == builtin.parties);
    CHECK(ghz.subsystems == builtin.subsystems);
    CHECK(ghz.settings == builtin.settings);
    CHECK(ghz.constraints == builtin.constraints);

    const auto epr = CorrelationSpec::load(dir + "epr.spec");
    CHECK(epr.constraints == epr_spec().constraints);
    CHECK(epr.settings == epr_spec().settings);

    const auto c = CorrelationSpec::parse_constraint("XZ:0,XZ:45=-1", 2);
    CHECK(c.settings == std::vector<std::string>{"XZ:0", "XZ:45"});
    CHECK(c.product == -1);
    CHECK(CorrelationSpec::describe(c) == "XZ:0,XZ:45=-1");

    CHECK_THROWS_AS(CorrelationSpec::parse_constraint("XX", 2), ParseError);
    CHECK_THROWS_AS(CorrelationSpec::parse_constraint("XX=2", 2), ParseError);
    CHECK_THROWS_AS(CorrelationSpec::parse_constraint("XXX=+1", 2), ParseError);
    CHECK_THROWS_AS(CorrelationSpec::parse("{"), ParseError);
    CHECK_THROWS_AS(CorrelationSpec::parse(R"({"parties": ["A"], "settings": [["X"]], "constraints": ["Y=+1"]})"),
                    ParseError);
    CHECK_THROWS_AS(CorrelationSpec::load(dir + "missing.spec"), ParseError);
    CHECK(CorrelationSpec::parse(R"({"parties": ["A", "B"], "constraints": [{"settings": ["X", "Z"], "product": -1}]})")
              .subsystems == std::vector<std::string>{"A", "B"});
}
