#include "lworlds/hilbert.hpp"

#include "lworlds/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

namespace lw::hilbert {

namespace {

void check_unique(const std::vector<Label>& labels)
{
    std::set<Label> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw DomainError("duplicate subsystem label '" + label + "'");
        }
    }
}

void check_qubit_cap(std::size_t n)
{
    if (n > kMaxQubits) {
        throw DomainError("state exceeds " + std::to_string(kMaxQubits) + " subsystems");
    }
}

inline int bit_at(std::size_t index, std::size_t n, std::size_t pos)
{
    return static_cast<int>((index >> (n - 1 - pos)) & 1u);
}

inline std::size_t mask_at(std::size_t n, std::size_t pos)
{
    return std::size_t{1} << (n - 1 - pos);
}

std::vector<std::size_t> positions_of(const StateVector& psi, std::span<const Label> labels)
{
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        out.push_back(psi.position(label));
    }
    std::set<std::size_t> unique(out.begin(), out.end());
    if (unique.size() != out.size()) {
        throw DomainError("label listed twice");
    }
    return out;
}

// Rotates the qubit at `pos` so that |0> carries the up-eigencomponent of
// `obs` and |1> the down-eigencomponent.
void rotate_into_eigenbasis(std::vector<complex>& amps, std::size_t n, std::size_t pos, const Observable& obs)
{
    const auto [u0, u1] = obs.eigenvector(+1);
    const auto [d0, d1] = obs.eigenvector(-1);
    const std::size_t mask = mask_at(n, pos);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & mask) {
            continue;
        }
        const complex a0 = amps[i];
        const complex a1 = amps[i | mask];
        amps[i] = std::conj(u0) * a0 + std::conj(u1) * a1;
        amps[i | mask] = std::conj(d0) * a0 + std::conj(d1) * a1;
    }
}

}  // namespace

// ---------------------------------------------------------------- StateVector

StateVector::StateVector() : amplitudes_{complex{1.0, 0.0}} {}

StateVector::StateVector(std::vector<Label> labels, std::vector<complex> amplitudes)
    : labels_(std::move(labels)), amplitudes_(std::move(amplitudes))
{
    check_unique(labels_);
    check_qubit_cap(labels_.size());
    if (amplitudes_.size() != (std::size_t{1} << labels_.size())) {
        throw DomainError("amplitude vector length must be 2^(number of labels)");
    }
    if (std::abs(norm() - 1.0) > kTolerance) {
        throw DomainError("state is not normalized");
    }
}

StateVector StateVector::basis(Label label, int bit)
{
    std::vector<complex> amps(2);
    amps[bit == 0 ? 0 : 1] = 1.0;
    return StateVector({std::move(label)}, std::move(amps));
}

StateVector StateVector::from_qubit(Label label, complex up, complex down)
{
    return StateVector({std::move(label)}, {up, down});
}

bool StateVector::has_label(const Label& label) const
{
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t StateVector::position(const Label& label) const
{
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw LookupError("unknown subsystem label '" + label + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

double StateVector::norm() const
{
    double sum = 0.0;
    for (const auto& a : amplitudes_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

StateVector StateVector::permuted(std::span<const Label> order) const
{
    if (order.size() != labels_.size()) {
        throw LookupError("permutation must list every label exactly once");
    }
    const auto source = positions_of(*this, order);
    const std::size_t n = labels_.size();
    std::vector<complex> out(amplitudes_.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        std::size_t i = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (bit_at(j, n, k)) {
                i |= mask_at(n, source[k]);
            }
        }
        out[j] = amplitudes_[i];
    }
    StateVector result;
    result.labels_.assign(order.begin(), order.end());
    result.amplitudes_ = std::move(out);
    return result;
}

StateVector StateVector::canonical() const
{
    std::vector<Label> order = labels_;
    std::sort(order.begin(), order.end());
    return permuted(order);
}

bool StateVector::approx_equal(const StateVector& other, double tol) const
{
    if (labels_.size() != other.labels_.size()) {
        return false;
    }
    for (const auto& label : labels_) {
        if (!other.has_label(label)) {
            return false;
        }
    }
    const StateVector aligned = other.permuted(labels_);
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        if (std::abs(amplitudes_[i] - aligned.amplitudes_[i]) > tol) {
            return false;
        }
    }
    return true;
}

// ------------------------------------------------------------------- Operator

Operator::Operator(std::vector<Label> labels, std::vector<complex> matrix, bool unitary)
    : labels_(std::move(labels)), matrix_(std::move(matrix)), unitary_(unitary)
{
    check_unique(labels_);
    check_qubit_cap(labels_.size());
    const std::size_t d = dimension();
    if (matrix_.size() != d * d) {
        throw DomainError("operator matrix must be 2^n x 2^n");
    }
    if (!unitary_) {
        return;
    }
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            complex sum = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                sum += std::conj(at(k, r)) * at(k, c);
            }
            const complex expected = r == c ? 1.0 : 0.0;
            if (std::abs(sum - expected) > kTolerance) {
                throw DomainError("operator flagged unitary fails U^dagger U = I");
            }
        }
    }
}

Operator Operator::identity(std::vector<Label> labels)
{
    const std::size_t d = std::size_t{1} << labels.size();
    std::vector<complex> m(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        m[i * d + i] = 1.0;
    }
    return Operator(std::move(labels), std::move(m), true);
}

bool Operator::is_hermitian(double tol) const
{
    const std::size_t d = dimension();
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) {
                return false;
            }
        }
    }
    return true;
}

// ----------------------------------------------------------------- Observable

Observable::Observable(PauliKind kind, std::string name, std::vector<complex> matrix,
                       std::pair<complex, complex> up, std::pair<complex, complex> down)
    : kind_(kind), name_(std::move(name)), matrix_(std::move(matrix)), up_(up), down_(down)
{
}

Observable Observable::x()
{
    const double s = 1.0 / std::sqrt(2.0);
    return Observable(PauliKind::X, "X", {0.0, 1.0, 1.0, 0.0}, {s, s}, {s, -s});
}

Observable Observable::y()
{
    const double s = 1.0 / std::sqrt(2.0);
    const complex i{0.0, 1.0};
    return Observable(PauliKind::Y, "Y", {0.0, -i, i, 0.0}, {s, s * i}, {s * i, s});
}

Observable Observable::z()
{
    return Observable(PauliKind::Z, "Z", {1.0, 0.0, 0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0});
}

Observable Observable::axis(double theta, double phi)
{
    const complex e_plus = std::polar(1.0, phi);
    const complex e_minus = std::polar(1.0, -phi);
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    std::vector<complex> m{std::cos(theta), std::sin(theta) * e_minus, std::sin(theta) * e_plus, -std::cos(theta)};
    char name[64];
    std::snprintf(name, sizeof name, "XZ:%g", theta * 180.0 / M_PI);
    if (phi != 0.0) {
        std::snprintf(name, sizeof name, "axis:%g,%g", theta * 180.0 / M_PI, phi * 180.0 / M_PI);
    }
    return Observable(PauliKind::Axis, name, std::move(m), {c, e_plus * s}, {s, -e_plus * c});
}

Observable Observable::parse(const std::string& text)
{
    if (text == "X") {
        return x();
    }
    if (text == "Y") {
        return y();
    }
    if (text == "Z") {
        return z();
    }
    if (text.rfind("XZ:", 0) == 0) {
        std::size_t used = 0;
        double degrees = 0.0;
        try {
            degrees = std::stod(text.substr(3), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 3 || !std::isfinite(degrees)) {
            throw DomainError("bad observable angle in '" + text + "'");
        }
        auto obs = axis(degrees * M_PI / 180.0, 0.0);
        obs.name_ = text;
        return obs;
    }
    throw DomainError("unknown observable '" + text + "' (expected X, Y, Z or XZ:<deg>)");
}

std::vector<complex> Observable::projector(int eigenvalue) const
{
    const auto [v0, v1] = eigenvector(eigenvalue);
    return {v0 * std::conj(v0), v0 * std::conj(v1), v1 * std::conj(v0), v1 * std::conj(v1)};
}

std::pair<complex, complex> Observable::eigenvector(int eigenvalue) const
{
    if (eigenvalue == +1) {
        return up_;
    }
    if (eigenvalue == -1) {
        return down_;
    }
    throw DomainError("spin eigenvalues are +1 and -1");
}

Operator Observable::as_operator(const Label& label) const
{
    return Operator({label}, matrix_, true);
}

// ------------------------------------------------------- OutcomeDistribution

double OutcomeDistribution::probability_of(std::span<const int> values) const
{
    for (const auto& e : entries) {
        if (std::equal(e.values.begin(), e.values.end(), values.begin(), values.end())) {
            return e.probability;
        }
    }
    throw LookupError("outcome tuple not in distribution");
}

double OutcomeDistribution::total() const
{
    double sum = 0.0;
    for (const auto& e : entries) {
        sum += e.probability;
    }
    return sum;
}

// ------------------------------------------------------------ DensityOperator

DensityOperator::DensityOperator(std::vector<Label> labels, std::vector<complex> matrix)
    : labels_(std::move(labels)), matrix_(std::move(matrix))
{
    check_unique(labels_);
    check_qubit_cap(labels_.size());
    const std::size_t d = dimension();
    if (matrix_.size() != d * d) {
        throw DomainError("density matrix must be 2^n x 2^n");
    }
    if (std::abs(trace() - 1.0) > kTolerance) {
        throw DomainError("density operator trace differs from 1");
    }
    if (!is_hermitian()) {
        throw DomainError("density operator is not Hermitian");
    }
    // Eigen-decomposition is only affordable for small operators.
    if (d <= 256 && min_eigenvalue() < -1e-10) {
        throw DomainError("density operator has a negative eigenvalue");
    }
}

DensityOperator DensityOperator::pure(const StateVector& psi)
{
    const auto amps = psi.amplitudes();
    const std::size_t d = amps.size();
    std::vector<complex> m(d * d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            m[r * d + c] = amps[r] * std::conj(amps[c]);
        }
    }
    return DensityOperator(psi.labels(), std::move(m));
}

complex DensityOperator::trace() const
{
    complex sum = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) {
        sum += at(i, i);
    }
    return sum;
}

bool DensityOperator::is_hermitian(double tol) const
{
    const std::size_t d = dimension();
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = r; c < d; ++c) {
            if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) {
                return false;
            }
        }
    }
    return true;
}

double DensityOperator::min_eigenvalue() const
{
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            m(r, c) = at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityOperator::expectation_of_projector(const StateVector& phi) const
{
    const StateVector aligned = phi.permuted(labels_);
    const auto v = aligned.amplitudes();
    const std::size_t d = dimension();
    complex sum = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            sum += std::conj(v[r]) * at(r, c) * v[c];
        }
    }
    return sum.real();
}

// ----------------------------------------------------------------- operations

StateVector tensor(const StateVector& a, const StateVector& b)
{
    for (const auto& label : b.labels()) {
        if (a.has_label(label)) {
            throw CompositionError("tensor product of overlapping subsystems: '" + label + "'");
        }
    }
    std::vector<Label> labels = a.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    check_qubit_cap(labels.size());
    const auto aa = a.amplitudes();
    const auto ba = b.amplitudes();
    std::vector<complex> amps(aa.size() * ba.size());
    for (std::size_t i = 0; i < aa.size(); ++i) {
        for (std::size_t j = 0; j < ba.size(); ++j) {
            amps[i * ba.size() + j] = aa[i] * ba[j];
        }
    }
    return StateVector(std::move(labels), std::move(amps));
}

Operator tensor(const Operator& a, const Operator& b)
{
    for (const auto& label : b.labels()) {
        if (std::find(a.labels().begin(), a.labels().end(), label) != a.labels().end()) {
            throw CompositionError("tensor product of overlapping subsystems: '" + label + "'");
        }
    }
    std::vector<Label> labels = a.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    const std::size_t da = a.dimension();
    const std::size_t db = b.dimension();
    const std::size_t d = da * db;
    std::vector<complex> m(d * d);
    for (std::size_t r1 = 0; r1 < da; ++r1) {
        for (std::size_t c1 = 0; c1 < da; ++c1) {
            for (std::size_t r2 = 0; r2 < db; ++r2) {
                for (std::size_t c2 = 0; c2 < db; ++c2) {
                    m[(r1 * db + r2) * d + (c1 * db + c2)] = a.at(r1, c1) * b.at(r2, c2);
                }
            }
        }
    }
    return Operator(std::move(labels), std::move(m), a.is_unitary() && b.is_unitary());
}

StateVector apply(const Operator& op, const StateVector& psi)
{
    if (!op.is_unitary()) {
        throw DomainError("apply requires an operator validated as unitary");
    }
    const auto pos = positions_of(psi, op.labels());
    const std::size_t n = psi.qubit_count();
    const std::size_t k = pos.size();
    const std::size_t dk = std::size_t{1} << k;

    std::vector<std::size_t> spread(dk, 0);
    std::size_t op_mask = 0;
    for (std::size_t col = 0; col < dk; ++col) {
        for (std::size_t j = 0; j < k; ++j) {
            if ((col >> (k - 1 - j)) & 1u) {
                spread[col] |= mask_at(n, pos[j]);
            }
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        op_mask |= mask_at(n, pos[j]);
    }

    const auto in = psi.amplitudes();
    std::vector<complex> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row = (row << 1) | static_cast<std::size_t>(bit_at(i, n, pos[j]));
        }
        const std::size_t base = i & ~op_mask;
        complex sum = 0.0;
        for (std::size_t col = 0; col < dk; ++col) {
            sum += op.at(row, col) * in[base | spread[col]];
        }
        out[i] = sum;
    }
    return StateVector(psi.labels(), std::move(out));
}

OutcomeDistribution born_distribution(const StateVector& psi, std::span<const Setting> settings)
{
    std::vector<Label> labels;
    for (const auto& [label, obs] : settings) {
        labels.push_back(label);
    }
    const auto pos = positions_of(psi, labels);
    const std::size_t n = psi.qubit_count();
    const std::size_t k = pos.size();

    std::vector<complex> amps(psi.amplitudes().begin(), psi.amplitudes().end());
    for (std::size_t j = 0; j < k; ++j) {
        rotate_into_eigenbasis(amps, n, pos[j], settings[j].second);
    }

    std::vector<double> marginal(std::size_t{1} << k, 0.0);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        std::size_t key = 0;
        for (std::size_t j = 0; j < k; ++j) {
            key = (key << 1) | static_cast<std::size_t>(bit_at(i, n, pos[j]));
        }
        marginal[key] += std::norm(amps[i]);
    }

    OutcomeDistribution dist;
    dist.labels = std::move(labels);
    dist.entries.reserve(marginal.size());
    for (std::size_t key = 0; key < marginal.size(); ++key) {
        OutcomeProbability e;
        for (std::size_t j = 0; j < k; ++j) {
            e.values.push_back(((key >> (k - 1 - j)) & 1u) ? -1 : +1);
        }
        e.probability = marginal[key];
        dist.entries.push_back(std::move(e));
    }
    return dist;
}

double basis_probability(const StateVector& psi, std::span<const std::pair<Label, int>> bits)
{
    const std::size_t n = psi.qubit_count();
    std::size_t mask = 0;
    std::size_t want = 0;
    for (const auto& [label, bit] : bits) {
        const std::size_t m = mask_at(n, psi.position(label));
        const std::size_t b = bit ? m : 0;
        if ((mask & m) && (want & m) != b) {
            return 0.0;
        }
        mask |= m;
        want |= b;
    }
    double sum = 0.0;
    const auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == want) {
            sum += std::norm(amps[i]);
        }
    }
    return sum;
}

double expectation(const StateVector& psi, std::span<const Setting> product)
{
    const auto dist = born_distribution(psi, product);
    double sum = 0.0;
    for (const auto& e : dist.entries) {
        int sign = 1;
        for (int v : e.values) {
            sign *= v;
        }
        sum += sign * e.probability;
    }
    return sum;
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const Label> keep)
{
    if (keep.empty()) {
        throw DomainError("partial trace over every subsystem leaves a scalar");
    }
    const auto& labels = rho.labels();
    std::vector<std::size_t> keep_pos;
    for (const auto& label : keep) {
        const auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) {
            throw LookupError("unknown subsystem label '" + label + "'");
        }
        keep_pos.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
    if (std::set<std::size_t>(keep_pos.begin(), keep_pos.end()).size() != keep_pos.size()) {
        throw DomainError("label listed twice");
    }
    const std::size_t n = labels.size();
    const std::size_t m = keep_pos.size();
    std::size_t keep_mask = 0;
    for (auto p : keep_pos) {
        keep_mask |= mask_at(n, p);
    }
    const std::size_t d = rho.dimension();
    const std::size_t dk = std::size_t{1} << m;
    std::vector<complex> out(dk * dk);
    auto reduce = [&](std::size_t i) {
        std::size_t key = 0;
        for (std::size_t j = 0; j < m; ++j) {
            key = (key << 1) | static_cast<std::size_t>(bit_at(i, n, keep_pos[j]));
        }
        return key;
    };
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            if ((r & ~keep_mask) != (c & ~keep_mask)) {
                continue;
            }
            out[reduce(r) * dk + reduce(c)] += rho.at(r, c);
        }
    }
    return DensityOperator(std::vector<Label>(keep.begin(), keep.end()), std::move(out));
}

DensityOperator partial_trace(const StateVector& psi, std::span<const Label> keep)
{
    if (keep.empty()) {
        throw DomainError("partial trace over every subsystem leaves a scalar");
    }
    // Move kept labels to the front so each traced configuration is a
    // contiguous block of the kept amplitudes.
    std::vector<Label> order(keep.begin(), keep.end());
    for (const auto& label : psi.labels()) {
        if (std::find(keep.begin(), keep.end(), label) == keep.end()) {
            order.push_back(label);
        }
    }
    const StateVector aligned = psi.permuted(order);
    const std::size_t dk = std::size_t{1} << keep.size();
    const std::size_t dr = aligned.dimension() / dk;
    const auto amps = aligned.amplitudes();
    std::vector<complex> out(dk * dk);
    for (std::size_t r = 0; r < dk; ++r) {
        for (std::size_t c = 0; c < dk; ++c) {
            complex sum = 0.0;
            for (std::size_t t = 0; t < dr; ++t) {
                sum += amps[r * dr + t] * std::conj(amps[c * dr + t]);
            }
            out[r * dk + c] = sum;
        }
    }
    return DensityOperator(std::vector<Label>(keep.begin(), keep.end()), std::move(out));
}

Operator measurement_coupling(const Label& system, const Label& pointer, const Observable& observable)
{
    const auto up = observable.projector(+1);
    const auto down = observable.projector(-1);
    // Row-major 4x4 over (system, pointer).
    std::vector<complex> m(16);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            const complex pu = up[r * 2 + c];
            const complex pd = down[r * 2 + c];
            // pointer identity block
            m[(r * 2 + 0) * 4 + (c * 2 + 0)] += pu;
            m[(r * 2 + 1) * 4 + (c * 2 + 1)] += pu;
            // pointer flip block
            m[(r * 2 + 0) * 4 + (c * 2 + 1)] += pd;
            m[(r * 2 + 1) * 4 + (c * 2 + 0)] += pd;
        }
    }
    return Operator({system, pointer}, std::move(m), true);
}

double inner_product_norm2(const StateVector& a, const StateVector& b)
{
    const StateVector aligned = b.permuted(a.labels());
    complex sum = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        sum += std::conj(a.amplitudes()[i]) * aligned.amplitudes()[i];
    }
    return std::norm(sum);
}

std::vector<complex> basis_coefficients(const StateVector& psi, std::span<const Setting> basis)
{
    std::vector<Label> order;
    for (const auto& [label, obs] : basis) {
        order.push_back(label);
    }
    const StateVector aligned = psi.permuted(order);
    std::vector<complex> amps(aligned.amplitudes().begin(), aligned.amplitudes().end());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        rotate_into_eigenbasis(amps, basis.size(), j, basis[j].second);
    }
    return amps;
}

}  // namespace lw::hilbert
