#include "quanvnet/qsim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quanvnet/errors.h"
#include "quanvnet/rng.h"

namespace quanvnet::qsim {

namespace {

constexpr std::array<std::pair<GateId, std::string_view>, 10> kGateNames{{
    {GateId::H, "H"},
    {GateId::X, "X"},
    {GateId::Y, "Y"},
    {GateId::Z, "Z"},
    {GateId::RX, "RX"},
    {GateId::RY, "RY"},
    {GateId::RZ, "RZ"},
    {GateId::CNOT, "CNOT"},
    {GateId::SWAP, "SWAP"},
    {GateId::TOFFOLI, "TOFFOLI"},
}};

void check_qubit_count(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                          std::to_string(n_qubits));
    }
}

void check_targets(std::size_t n_qubits, std::span<const std::size_t> targets) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= n_qubits) {
            throw ConfigError("qubit index " + std::to_string(targets[i]) + " out of range for " +
                              std::to_string(n_qubits) + " qubits");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[i] == targets[j]) {
                throw ConfigError("duplicate qubit index " + std::to_string(targets[i]));
            }
        }
    }
}

GateMatrix make_matrix(std::size_t dim, std::initializer_list<Complex> entries) {
    return GateMatrix{dim, std::vector<Complex>(entries)};
}

}  // namespace

std::string_view gate_name(GateId id) {
    for (const auto& [gate, name] : kGateNames) {
        if (gate == id) {
            return name;
        }
    }
    return "?";
}

GateId parse_gate(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (const auto& [gate, gname] : kGateNames) {
        if (gname == upper) {
            return gate;
        }
    }
    throw ConfigError("unknown gate id '" + std::string(name) + "'");
}

std::size_t gate_arity(GateId id) {
    switch (id) {
        case GateId::CNOT:
        case GateId::SWAP:
            return 2;
        case GateId::TOFFOLI:
            return 3;
        default:
            return 1;
    }
}

std::size_t gate_param_count(GateId id) {
    return (id == GateId::RX || id == GateId::RY || id == GateId::RZ) ? 1 : 0;
}

Statevector::Statevector(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubit_count(n_qubits);
    if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
        throw ConfigError("statevector length " + std::to_string(amplitudes_.size()) + " != 2^" +
                          std::to_string(n_qubits));
    }
}

double Statevector::norm_squared() const {
    double total = 0;
    for (const auto& a : amplitudes_) {
        total += std::norm(a);
    }
    return total;
}

Statevector Statevector::basis(std::size_t n_qubits, std::size_t index) {
    check_qubit_count(n_qubits);
    std::vector<Complex> amps(std::size_t{1} << n_qubits);
    if (index >= amps.size()) {
        throw ConfigError("basis index out of range");
    }
    amps[index] = 1.0;
    return Statevector(n_qubits, std::move(amps));
}

GateMatrix GateMatrix::adjoint() const {
    GateMatrix out{dimension, std::vector<Complex>(entries.size())};
    for (std::size_t r = 0; r < dimension; ++r) {
        for (std::size_t c = 0; c < dimension; ++c) {
            out.at(c, r) = std::conj(at(r, c));
        }
    }
    return out;
}

GateMatrix GateMatrix::operator*(const GateMatrix& rhs) const {
    if (dimension != rhs.dimension) {
        throw ConfigError("matrix dimension mismatch");
    }
    GateMatrix out{dimension, std::vector<Complex>(entries.size())};
    for (std::size_t r = 0; r < dimension; ++r) {
        for (std::size_t k = 0; k < dimension; ++k) {
            const Complex a = at(r, k);
            for (std::size_t c = 0; c < dimension; ++c) {
                out.at(r, c) += a * rhs.at(k, c);
            }
        }
    }
    return out;
}

double GateMatrix::unitarity_error() const {
    const GateMatrix product = adjoint() * *this;
    double worst = 0;
    for (std::size_t r = 0; r < dimension; ++r) {
        for (std::size_t c = 0; c < dimension; ++c) {
            const Complex expected = (r == c) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(product.at(r, c) - expected));
        }
    }
    return worst;
}

GateMatrix GateMatrix::identity(std::size_t dimension) {
    GateMatrix out{dimension, std::vector<Complex>(dimension * dimension)};
    for (std::size_t i = 0; i < dimension; ++i) {
        out.at(i, i) = 1.0;
    }
    return out;
}

Circuit::Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) { check_qubit_count(n_qubits); }

Circuit& Circuit::append(GateId gate, std::vector<double> params, std::vector<std::size_t> qubits) {
    if (qubits.size() != gate_arity(gate)) {
        throw ConfigError(std::string(gate_name(gate)) + " acts on " + std::to_string(gate_arity(gate)) +
                          " qubits, got " + std::to_string(qubits.size()));
    }
    if (params.size() != gate_param_count(gate)) {
        throw ConfigError(std::string(gate_name(gate)) + " takes " + std::to_string(gate_param_count(gate)) +
                          " parameters, got " + std::to_string(params.size()));
    }
    check_targets(n_qubits_, qubits);
    ops_.push_back(Op{gate, std::move(params), std::move(qubits)});
    return *this;
}

ShotCounts::ShotCounts(std::size_t n_qubits, std::vector<std::uint64_t> counts)
    : n_qubits_(n_qubits), counts_(std::move(counts)), total_(0) {
    check_qubit_count(n_qubits);
    if (counts_.size() != (std::size_t{1} << n_qubits)) {
        throw ConfigError("shot count vector has wrong length");
    }
    for (auto c : counts_) {
        total_ += c;
    }
}

ShotCounts ShotCounts::from_bitstrings(std::size_t n_qubits, const std::map<std::string, std::uint64_t>& counts) {
    check_qubit_count(n_qubits);
    std::vector<std::uint64_t> dense(std::size_t{1} << n_qubits);
    for (const auto& [key, value] : counts) {
        if (key.size() != n_qubits || key.find_first_not_of("01") != std::string::npos) {
            throw ConfigError("bad bitstring '" + key + "' for " + std::to_string(n_qubits) + " qubits");
        }
        dense[std::stoull(key, nullptr, 2)] += value;
    }
    return ShotCounts(n_qubits, std::move(dense));
}

std::map<std::string, std::uint64_t> ShotCounts::to_bitstrings() const {
    std::map<std::string, std::uint64_t> out;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] != 0) {
            out.emplace(bitstring(i, n_qubits_), counts_[i]);
        }
    }
    return out;
}

std::uint64_t ShotCounts::zeros_on(std::size_t qubit) const {
    if (qubit >= n_qubits_) {
        throw ConfigError("qubit index out of range");
    }
    std::uint64_t zeros = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (((i >> qubit) & 1U) == 0) {
            zeros += counts_[i];
        }
    }
    return zeros;
}

std::string bitstring(std::size_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) {
            s[n_qubits - 1 - q] = '1';
        }
    }
    return s;
}

Statevector zero_state(std::size_t n_qubits) { return Statevector::basis(n_qubits, 0); }

GateMatrix standard_gate(GateId gate, std::span<const double> params) {
    if (params.size() != gate_param_count(gate)) {
        throw ConfigError(std::string(gate_name(gate)) + " takes " + std::to_string(gate_param_count(gate)) +
                          " parameters, got " + std::to_string(params.size()));
    }
    constexpr Complex i{0.0, 1.0};
    const double s2 = 1.0 / std::numbers::sqrt2;
    switch (gate) {
        case GateId::H:
            return make_matrix(2, {s2, s2, s2, -s2});
        case GateId::X:
            return make_matrix(2, {0.0, 1.0, 1.0, 0.0});
        case GateId::Y:
            return make_matrix(2, {0.0, -i, i, 0.0});
        case GateId::Z:
            return make_matrix(2, {1.0, 0.0, 0.0, -1.0});
        case GateId::RX: {
            const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
            return make_matrix(2, {c, -i * s, -i * s, c});
        }
        case GateId::RY: {
            const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
            return make_matrix(2, {c, -s, s, c});
        }
        case GateId::RZ: {
            const double half = params[0] / 2;
            return make_matrix(2, {std::polar(1.0, -half), 0.0, 0.0, std::polar(1.0, half)});
        }
        case GateId::CNOT:
            return make_matrix(4, {1, 0, 0, 0,  //
                                   0, 1, 0, 0,  //
                                   0, 0, 0, 1,  //
                                   0, 0, 1, 0});
        case GateId::SWAP:
            return make_matrix(4, {1, 0, 0, 0,  //
                                   0, 0, 1, 0,  //
                                   0, 1, 0, 0,  //
                                   0, 0, 0, 1});
        case GateId::TOFFOLI: {
            GateMatrix m = GateMatrix::identity(8);
            m.at(6, 6) = 0;
            m.at(7, 7) = 0;
            m.at(6, 7) = 1;
            m.at(7, 6) = 1;
            return m;
        }
    }
    throw ConfigError("unknown gate id");
}

void apply_gate_inplace(Statevector& state, const GateMatrix& gate, std::span<const std::size_t> targets) {
    const std::size_t k = targets.size();
    if (k == 0 || gate.dimension != (std::size_t{1} << k) || gate.entries.size() != gate.dimension * gate.dimension) {
        throw ConfigError("gate dimension " + std::to_string(gate.dimension) + " does not match " +
                          std::to_string(k) + " targets");
    }
    check_targets(state.n_qubits(), targets);
    auto amps = state.amplitudes();

    if (k == 1) {
        const std::size_t bit = std::size_t{1} << targets[0];
        const Complex m00 = gate.at(0, 0), m01 = gate.at(0, 1), m10 = gate.at(1, 0), m11 = gate.at(1, 1);
        for (std::size_t base = 0; base < amps.size(); ++base) {
            if (base & bit) {
                continue;
            }
            const Complex a0 = amps[base], a1 = amps[base | bit];
            amps[base] = m00 * a0 + m01 * a1;
            amps[base | bit] = m10 * a0 + m11 * a1;
        }
        return;
    }

    // Local index l maps to global offsets: bit (k-1-j) of l sets qubit targets[j].
    const std::size_t dim = gate.dimension;
    std::vector<std::size_t> offsets(dim, 0);
    std::size_t target_mask = 0;
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t j = 0; j < k; ++j) {
            if ((l >> (k - 1 - j)) & 1U) {
                offsets[l] |= std::size_t{1} << targets[j];
            }
        }
    }
    for (auto t : targets) {
        target_mask |= std::size_t{1} << t;
    }
    std::vector<Complex> local(dim);
    for (std::size_t base = 0; base < amps.size(); ++base) {
        if (base & target_mask) {
            continue;
        }
        for (std::size_t l = 0; l < dim; ++l) {
            local[l] = amps[base | offsets[l]];
        }
        for (std::size_t r = 0; r < dim; ++r) {
            Complex acc = 0;
            for (std::size_t c = 0; c < dim; ++c) {
                acc += gate.at(r, c) * local[c];
            }
            amps[base | offsets[r]] = acc;
        }
    }
}

Statevector apply_gate(const Statevector& state, const GateMatrix& gate, std::span<const std::size_t> targets) {
    Statevector out = state;
    apply_gate_inplace(out, gate, targets);
    return out;
}

Statevector run_circuit(const Circuit& circuit, const Statevector& initial) {
    if (circuit.n_qubits() != initial.n_qubits()) {
        throw ConfigError("circuit has " + std::to_string(circuit.n_qubits()) + " qubits, state has " +
                          std::to_string(initial.n_qubits()));
    }
    Statevector state = initial;
    for (const Op& op : circuit.ops()) {
        apply_gate_inplace(state, standard_gate(op.gate, op.params), op.qubits);
    }
    return state;
}

double expectation_z(const Statevector& state, std::size_t qubit) {
    if (qubit >= state.n_qubits()) {
        throw ConfigError("qubit index " + std::to_string(qubit) + " out of range");
    }
    double value = 0;
    const auto amps = state.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const double p = std::norm(amps[b]);
        value += ((b >> qubit) & 1U) ? -p : p;
    }
    return std::clamp(value, -1.0, 1.0);
}

ShotCounts sample_shots(const Statevector& state, std::uint64_t shots, std::uint64_t rng_seed) {
    if (shots == 0) {
        throw ConfigError("shots must be >= 1; use expectation_z for exact values");
    }
    const auto amps = state.amplitudes();
    std::vector<double> cdf(amps.size());
    double running = 0;
    for (std::size_t b = 0; b < amps.size(); ++b) {
        running += std::norm(amps[b]);
        cdf[b] = running;
    }
    // Scale draws by the accumulated mass so rounding in the norm cannot leave a gap.
    const double mass = running;
    std::vector<std::uint64_t> counts(amps.size(), 0);
    Rng rng(rng_seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform01() * mass;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t index = static_cast<std::size_t>(it - cdf.begin());
        if (index >= cdf.size()) {
            // Only reachable through rounding at the top of the range.
            index = cdf.size() - 1;
            while (index > 0 && std::norm(amps[index]) == 0.0) {
                --index;
            }
        }
        ++counts[index];
    }
    return ShotCounts(state.n_qubits(), std::move(counts));
}

double estimate_z_from_shots(const ShotCounts& counts, std::size_t qubit) {
    if (counts.total() == 0) {
        throw ConfigError("shot counts are empty");
    }
    const auto zeros = static_cast<double>(counts.zeros_on(qubit));
    const auto total = static_cast<double>(counts.total());
    return (zeros - (total - zeros)) / total;
}

std::string statevector_csv(const Statevector& state) {
    std::ostringstream out;
    out.precision(17);
    out << "index,re,im\n";
    const auto amps = state.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) {
        out << b << ',' << amps[b].real() << ',' << amps[b].imag() << '\n';
    }
    return out.str();
}

}  // namespace quanvnet::qsim
