#pragma once

// Dense complex linear algebra for few-qubit states.
//
// Bit convention: the first label of a state is the most significant bit of
// the amplitude index, and bit value 0 is |up_z>, the +1 eigenvector of Z.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lw::hilbert {

using complex = std::complex<double>;
using Label = std::string;

inline constexpr double kTolerance = 1e-12;
inline constexpr std::size_t kMaxQubits = 12;

class StateVector {
public:
    /// Zero-qubit state (the scalar 1).
    StateVector();
    StateVector(std::vector<Label> labels, std::vector<complex> amplitudes);

    /// Single-qubit computational basis state, bit 0 = up_z.
    static StateVector basis(Label label, int bit);
    static StateVector from_qubit(Label label, complex up, complex down);

    const std::vector<Label>& labels() const { return labels_; }
    std::span<const complex> amplitudes() const { return amplitudes_; }
    std::size_t qubit_count() const { return labels_.size(); }
    std::size_t dimension() const { return amplitudes_.size(); }

    bool has_label(const Label& label) const;
    /// Bit position of a label (0 = most significant), throws LookupError.
    std::size_t position(const Label& label) const;
    double norm() const;

    /// Same vector with labels reordered; `order` must be a permutation.
    StateVector permuted(std::span<const Label> order) const;
    /// Labels sorted lexicographically.
    StateVector canonical() const;

    /// Label-set and amplitude equality up to reordering, within `tol`.
    bool approx_equal(const StateVector& other, double tol = kTolerance) const;

private:
    std::vector<Label> labels_;
    std::vector<complex> amplitudes_;
};

class Operator {
public:
    /// Row-major 2^n x 2^n matrix. When `unitary` is set the matrix is
    /// checked against U^dagger U = I on construction.
    Operator(std::vector<Label> labels, std::vector<complex> matrix, bool unitary);

    static Operator identity(std::vector<Label> labels);

    const std::vector<Label>& labels() const { return labels_; }
    std::span<const complex> matrix() const { return matrix_; }
    std::size_t dimension() const { return std::size_t{1} << labels_.size(); }
    bool is_unitary() const { return unitary_; }
    complex at(std::size_t row, std::size_t col) const { return matrix_[row * dimension() + col]; }

    bool is_hermitian(double tol = kTolerance) const;

private:
    std::vector<Label> labels_;
    std::vector<complex> matrix_;
    bool unitary_;
};

enum class PauliKind { X, Y, Z, Axis };

/// Single-qubit +-1 valued spin observable.
class Observable {
public:
    static Observable x();
    static Observable y();
    static Observable z();
    /// Spin along (sin th cos ph, sin th sin ph, cos th).
    static Observable axis(double theta, double phi);
    /// "X", "Y", "Z", or "XZ:<deg>" (angle from Z toward X, in degrees).
    static Observable parse(const std::string& text);

    PauliKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    /// 2x2 row-major matrix.
    const std::vector<complex>& matrix() const { return matrix_; }
    /// Rank-1 projector onto the eigenspace of `eigenvalue` (+1 or -1).
    std::vector<complex> projector(int eigenvalue) const;
    /// Eigenvector for `eigenvalue`. Phases: up_x = (1,1)/sqrt2,
    /// down_x = (1,-1)/sqrt2, up_y = (1,i)/sqrt2, down_y = (i,1)/sqrt2.
    std::pair<complex, complex> eigenvector(int eigenvalue) const;

    Operator as_operator(const Label& label) const;

private:
    Observable(PauliKind kind, std::string name, std::vector<complex> matrix,
               std::pair<complex, complex> up, std::pair<complex, complex> down);

    PauliKind kind_;
    std::string name_;
    std::vector<complex> matrix_;
    std::pair<complex, complex> up_;
    std::pair<complex, complex> down_;
};

/// Outcome order used everywhere: +1 before -1.
inline constexpr int kOutcomes[2] = {+1, -1};

struct OutcomeProbability {
    std::vector<int> values;
    double probability = 0.0;
};

struct OutcomeDistribution {
    std::vector<Label> labels;
    /// All 2^k tuples in lexicographic order with +1 < -1.
    std::vector<OutcomeProbability> entries;

    double probability_of(std::span<const int> values) const;
    double total() const;
};

using Setting = std::pair<Label, Observable>;

class DensityOperator {
public:
    DensityOperator(std::vector<Label> labels, std::vector<complex> matrix);
    static DensityOperator pure(const StateVector& psi);

    const std::vector<Label>& labels() const { return labels_; }
    std::span<const complex> matrix() const { return matrix_; }
    std::size_t dimension() const { return std::size_t{1} << labels_.size(); }
    complex at(std::size_t row, std::size_t col) const { return matrix_[row * dimension() + col]; }

    complex trace() const;
    bool is_hermitian(double tol = kTolerance) const;
    double min_eigenvalue() const;
    /// Tr(rho P) for a rank-1 projector |phi><phi| over the same labels.
    double expectation_of_projector(const StateVector& phi) const;

private:
    std::vector<Label> labels_;
    std::vector<complex> matrix_;
};

StateVector tensor(const StateVector& a, const StateVector& b);
Operator tensor(const Operator& a, const Operator& b);

/// Applies `op` lifted by the identity on the remaining labels of `psi`.
StateVector apply(const Operator& op, const StateVector& psi);

OutcomeDistribution born_distribution(const StateVector& psi, std::span<const Setting> settings);

/// Probability that each listed label, measured in Z, shows the given bit.
double basis_probability(const StateVector& psi, std::span<const std::pair<Label, int>> bits);

double expectation(const StateVector& psi, std::span<const Setting> product);

DensityOperator partial_trace(const DensityOperator& rho, std::span<const Label> keep);
DensityOperator partial_trace(const StateVector& psi, std::span<const Label> keep);

/// Measurement coupling on (system, pointer): P_up (x) I + P_down (x) X.
/// With the pointer ready in |0>, the pointer reads 0 for +1 and 1 for -1.
Operator measurement_coupling(const Label& system, const Label& pointer, const Observable& observable);

double inner_product_norm2(const StateVector& a, const StateVector& b);

/// Coefficients of psi on the product eigenbasis of the given observables,
/// in the same order as born_distribution entries.
std::vector<complex> basis_coefficients(const StateVector& psi, std::span<const Setting> basis);

}  // namespace lw::hilbert
