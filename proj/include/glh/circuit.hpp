// circuit.hpp — gate-list circuits with idling, statevector simulation at desk
// scale, acceptance probability, and the toy verifier catalog.

#pragma once

#include "glh/common.hpp"
#include "glh/hamiltonian.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace glh::qc {

// --------------------------- Gate / Circuit ----------------------------------

struct Gate {
    std::vector<int> support;  // 1 or 2 qubits; support[0] is the low local bit
    Matrix matrix;             // unitary of dim 2 or 4
    std::string label;

    Gate() = default;
    Gate(std::vector<int> support_, Matrix matrix_, std::string label_ = "")
        : support(std::move(support_)), matrix(std::move(matrix_)), label(std::move(label_)) {
        validate();
    }

    void validate() const {
        if (support.size() < 1 || support.size() > 2)
            throw ValidationError("gate must act on 1 or 2 qubits");
        if (support.size() == 2 && support[0] == support[1])
            throw ValidationError("gate support qubits must be distinct");
        const Index dim = Index{1} << support.size();
        if (matrix.rows() != dim || matrix.cols() != dim)
            throw ValidationError("gate matrix dimension does not match support");
        Matrix g = matrix.adjoint() * matrix;
        if ((g - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kHermitianTol)
            throw ValidationError("gate matrix is not unitary to 1e-12");
    }
};

inline Gate identity_gate(int qubit, std::string label = "I") {
    return Gate({qubit}, Matrix::Identity(2, 2), std::move(label));
}

inline Gate x_gate(int qubit) { return Gate({qubit}, ham::pauli_x(), "X"); }

inline Gate h_gate(int qubit) {
    Matrix h(2, 2);
    h << 1, 1,
         1, -1;
    h /= std::sqrt(2.0);
    return Gate({qubit}, std::move(h), "H");
}

// control is the first listed qubit (low local bit)
inline Gate cnot_gate(int control, int target) {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1;  // c=0 t=0
    m(2, 2) = 1;  // c=0 t=1
    m(3, 1) = 1;  // c=1 t=0 -> t=1
    m(1, 3) = 1;  // c=1 t=1 -> t=0
    return Gate({control, target}, std::move(m), "CNOT");
}

// Verifier circuit acting on |x>_A |0...0>_B; register A is qubits
// 0..n_input-1, register B the rest.
struct Circuit {
    int n_input = 0;
    int n_ancilla = 0;
    std::vector<Gate> gates;
    std::string input_x;  // length n_input, character i = bit of qubit i
    int output_qubit = 0;

    int total_qubits() const { return n_input + n_ancilla; }
    int gate_count() const { return static_cast<int>(gates.size()); }

    void validate() const {
        if (n_input < 0 || n_ancilla < 0 || total_qubits() < 1)
            throw ValidationError("circuit needs at least one qubit");
        if (static_cast<int>(input_x.size()) != n_input)
            throw ValidationError("input_x length must equal n_input");
        for (char ch : input_x)
            if (ch != '0' && ch != '1') throw ValidationError("input_x must be a 0/1 string");
        if (gates.empty()) throw ValidationError("circuit needs at least one gate");
        for (const auto& g : gates) {
            g.validate();
            for (int q : g.support)
                if (q < 0 || q >= total_qubits())
                    throw ValidationError("gate support outside the circuit registers");
        }
        if (output_qubit < 0 || output_qubit >= total_qubits())
            throw ValidationError("output qubit outside the circuit registers");
    }
};

// Circuit preceded by N identity gates, so gate t of the idled circuit is an
// identity for t <= N.  Identities act on the output qubit; the choice only
// affects which qubit the clock construction touches with an identity factor.
struct IdledCircuit {
    Circuit base;
    int idle_steps = 0;

    int total_gates() const { return base.gate_count() + idle_steps; }

    // 1-based step index t in [1, total_gates()]
    Gate gate(int t) const {
        if (t < 1 || t > total_gates()) throw ValidationError("gate step out of range");
        if (t <= idle_steps) return identity_gate(base.output_qubit, "idle");
        return base.gates[static_cast<std::size_t>(t - idle_steps - 1)];
    }

    void validate() const {
        base.validate();
        if (idle_steps < 0) throw ValidationError("idle step count must be >= 0");
    }
};

inline IdledCircuit idle(const Circuit& c, int n_steps) {
    if (n_steps < 0) throw ValidationError("idle step count must be >= 0");
    c.validate();
    return IdledCircuit{c, n_steps};
}

// --------------------------- simulation --------------------------------------

inline void apply_gate_in_place(Vector& psi, const Gate& g, int n_qubits) {
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;
    if (g.support.size() == 1) {
        const int q = g.support[0];
        const std::uint64_t stride = std::uint64_t{1} << q;
        for (std::uint64_t base = 0; base < dim; ++base) {
            if (base & stride) continue;
            const Complex a0 = psi(static_cast<Index>(base));
            const Complex a1 = psi(static_cast<Index>(base | stride));
            psi(static_cast<Index>(base)) = g.matrix(0, 0) * a0 + g.matrix(0, 1) * a1;
            psi(static_cast<Index>(base | stride)) = g.matrix(1, 0) * a0 + g.matrix(1, 1) * a1;
        }
    } else {
        const std::uint64_t s0 = std::uint64_t{1} << g.support[0];
        const std::uint64_t s1 = std::uint64_t{1} << g.support[1];
        for (std::uint64_t base = 0; base < dim; ++base) {
            if (base & (s0 | s1)) continue;
            const std::uint64_t idx[4] = {base, base | s0, base | s1, base | s0 | s1};
            Complex in[4];
            for (int i = 0; i < 4; ++i) in[i] = psi(static_cast<Index>(idx[i]));
            for (int r = 0; r < 4; ++r) {
                Complex acc(0, 0);
                for (int c = 0; c < 4; ++c) acc += g.matrix(r, c) * in[c];
                psi(static_cast<Index>(idx[r])) = acc;
            }
        }
    }
}

inline Vector initial_state(const Circuit& c) {
    const Index dim = Index{1} << c.total_qubits();
    Vector psi = Vector::Zero(dim);
    psi(static_cast<Index>(from_bit_string(c.input_x))) = 1.0;
    return psi;
}

// U_m ... U_1 |x>_A |0...0>_B
inline Vector simulate(const Circuit& c, const Caps& caps = default_caps()) {
    c.validate();
    if (c.total_qubits() > caps.simulate_max_qubits)
        throw CapacityError("simulate: circuit exceeds the qubit cap");
    Vector psi = initial_state(c);
    for (const auto& g : c.gates) apply_gate_in_place(psi, g, c.total_qubits());
    return psi;
}

// Probability that measuring the output qubit yields 1.
inline double acceptance_probability(const Circuit& c, const Caps& caps = default_caps()) {
    Vector psi = simulate(c, caps);
    const std::uint64_t mask = std::uint64_t{1} << c.output_qubit;
    double p = 0.0;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(psi.size()); ++i)
        if (i & mask) p += std::norm(psi(static_cast<Index>(i)));
    return p;
}

// --------------------------- toy catalog -------------------------------------

struct CatalogEntry {
    std::string name;
    Circuit circuit;
    double expected_acceptance = 0.0;
    std::string note;
};

// Deterministic stand-ins for amplified verifiers: the YES/NO energy analysis
// only sees the acceptance probability, so p = 1 and p = 0 make the clock
// bounds exact at desk scale.
inline std::vector<CatalogEntry> toy_catalog() {
    std::vector<CatalogEntry> out;

    {
        Circuit c;
        c.n_input = 1;
        c.n_ancilla = 0;
        c.input_x = "0";
        c.output_qubit = 0;
        c.gates = {x_gate(0)};
        out.push_back({"accept", c, 1.0, "deterministic acceptor: X on the output"});
    }
    {
        Circuit c;
        c.n_input = 1;
        c.n_ancilla = 0;
        c.input_x = "0";
        c.output_qubit = 0;
        c.gates = {identity_gate(0)};
        out.push_back({"reject", c, 0.0, "deterministic rejector: identity"});
    }
    {
        Circuit c;
        c.n_input = 1;
        c.n_ancilla = 0;
        c.input_x = "0";
        c.output_qubit = 0;
        c.gates = {h_gate(0)};
        out.push_back({"coin", c, 0.5, "unbiased coin: H on the output"});
    }
    {
        // Entangles the registers mid-circuit and still accepts with
        // certainty: H, CNOT, CNOT, H undoes itself, then X flips the output.
        Circuit c;
        c.n_input = 1;
        c.n_ancilla = 1;
        c.input_x = "0";
        c.output_qubit = 0;
        c.gates = {h_gate(0), cnot_gate(0, 1), cnot_gate(0, 1), h_gate(0), x_gate(0)};
        out.push_back({"bell-accept", c, 1.0, "entangling acceptor via a CNOT pair"});
    }

    return out;
}

inline const CatalogEntry& find_catalog(const std::string& name) {
    static const std::vector<CatalogEntry> entries = toy_catalog();
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw ValidationError("unknown catalog circuit: " + name);
}

} // namespace glh::qc
