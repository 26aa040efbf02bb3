#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Dense statevector simulator for small registers.
//
// Qubit ordering: qubit q is bit q of the basis index, so qubit 0 is the
// least-significant bit. Bitstrings are written most-significant first, i.e.
// the string for index b is b in binary padded to n_qubits digits and the
// rightmost character is qubit 0.
//
// Multi-qubit gate matrices are indexed with targets[0] as the most significant
// local bit: CNOT takes [control, target], TOFFOLI takes [control, control, target].

namespace quanvnet::qsim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;

enum class GateId { H, X, Y, Z, RX, RY, RZ, CNOT, SWAP, TOFFOLI };

std::string_view gate_name(GateId id);
GateId parse_gate(std::string_view name);
/// Number of qubits the gate acts on.
std::size_t gate_arity(GateId id);
/// Number of real parameters the gate takes (1 for rotations, else 0).
std::size_t gate_param_count(GateId id);

class Statevector {
   public:
    Statevector(std::size_t n_qubits, std::vector<Complex> amplitudes);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    std::span<Complex> amplitudes() { return amplitudes_; }
    const Complex& operator[](std::size_t index) const { return amplitudes_[index]; }

    double norm_squared() const;

    /// Computational basis state with the given index.
    static Statevector basis(std::size_t n_qubits, std::size_t index);

   private:
    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

struct GateMatrix {
    std::size_t dimension = 0;
    std::vector<Complex> entries;  // row-major, dimension x dimension

    const Complex& at(std::size_t row, std::size_t col) const { return entries[row * dimension + col]; }
    Complex& at(std::size_t row, std::size_t col) { return entries[row * dimension + col]; }

    GateMatrix adjoint() const;
    GateMatrix operator*(const GateMatrix& rhs) const;
    /// Largest absolute entry of U^dagger U - I.
    double unitarity_error() const;
    static GateMatrix identity(std::size_t dimension);
};

struct Op {
    GateId gate;
    std::vector<double> params;
    std::vector<std::size_t> qubits;

    bool operator==(const Op&) const = default;
};

class Circuit {
   public:
    explicit Circuit(std::size_t n_qubits);

    /// Appends an op after validating arity, parameter count and qubit indices.
    Circuit& append(GateId gate, std::vector<double> params, std::vector<std::size_t> qubits);
    Circuit& append(GateId gate, std::vector<std::size_t> qubits) { return append(gate, {}, std::move(qubits)); }

    std::size_t n_qubits() const { return n_qubits_; }
    const std::vector<Op>& ops() const { return ops_; }
    bool empty() const { return ops_.empty(); }

    bool operator==(const Circuit&) const = default;

   private:
    std::size_t n_qubits_;
    std::vector<Op> ops_;
};

/// Dense per-basis-state counts. Index b holds the count for basis state b.
class ShotCounts {
   public:
    ShotCounts(std::size_t n_qubits, std::vector<std::uint64_t> counts);
    /// Builds counts from bitstring keys (most-significant qubit first).
    static ShotCounts from_bitstrings(std::size_t n_qubits, const std::map<std::string, std::uint64_t>& counts);

    std::size_t n_qubits() const { return n_qubits_; }
    std::uint64_t total() const { return total_; }
    std::uint64_t count(std::size_t index) const { return counts_[index]; }
    std::span<const std::uint64_t> counts() const { return counts_; }
    /// Nonzero entries keyed by bitstring.
    std::map<std::string, std::uint64_t> to_bitstrings() const;
    /// Number of shots in which the given qubit read 0.
    std::uint64_t zeros_on(std::size_t qubit) const;

   private:
    std::size_t n_qubits_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_;
};

std::string bitstring(std::size_t index, std::size_t n_qubits);

Statevector zero_state(std::size_t n_qubits);

GateMatrix standard_gate(GateId gate, std::span<const double> params = {});

/// Returns U|psi> with U acting on the listed target qubits.
Statevector apply_gate(const Statevector& state, const GateMatrix& gate, std::span<const std::size_t> targets);
/// In-place form of apply_gate.
void apply_gate_inplace(Statevector& state, const GateMatrix& gate, std::span<const std::size_t> targets);

Statevector run_circuit(const Circuit& circuit, const Statevector& initial);

/// Exact <Z> on one qubit.
double expectation_z(const Statevector& state, std::size_t qubit);

/// Multinomial sample of `shots` measurements in the computational basis.
ShotCounts sample_shots(const Statevector& state, std::uint64_t shots, std::uint64_t rng_seed);

/// (n_zero - n_one) / total for one qubit.
double estimate_z_from_shots(const ShotCounts& counts, std::size_t qubit);

/// Writes "index,re,im" rows with a header.
std::string statevector_csv(const Statevector& state);

}  // namespace quanvnet::qsim
