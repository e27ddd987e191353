// clock.hpp — 5-local clock Hamiltonian for a pre-idled verifier circuit, with
// two evaluation backends: a faithful unary-clock qubit encoding (terms stay
// at most 5-local) and a direct clock-space encoding on C^(2^n) (x) C^(M+1)
// that reaches much larger M.  The history state, the subset guiding state,
// the scaling recipe for Delta, and the spectral-gap certificate live here.

#pragma once

#include "glh/circuit.hpp"
#include "glh/common.hpp"
#include "glh/guide_states.hpp"
#include "glh/hamiltonian.hpp"
#include "glh/spectra.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace glh::clock {

enum class Backend { unary, direct };

inline const char* to_string(Backend b) { return b == Backend::unary ? "unary" : "direct"; }

// Register layout: data qubits 0..n-1 (input register first), then M unary
// clock qubits.  Clock value t is encoded as 1^t 0^(M-t); legal clock states
// contain no "01" substring.
struct Layout {
    int n_input = 0;
    int n_ancilla = 0;
    int steps = 0;  // M

    int data_qubits() const { return n_input + n_ancilla; }
    int total_unary_qubits() const { return data_qubits() + steps; }
    int clock_qubit(int j) const { return data_qubits() + j - 1; }  // j in 1..M
    Index data_dim() const { return Index{1} << data_qubits(); }
    Index direct_dim() const { return data_dim() * (steps + 1); }

    std::uint64_t unary_clock_bits(int t) const {
        std::uint64_t bits = 0;
        for (int j = 1; j <= t; ++j) bits |= std::uint64_t{1} << clock_qubit(j);
        return bits;
    }
};

struct ClockOptions {
    // Assembles H_in as the printed product form
    // (I - |x><x|)_A (x) (I - |0..0><0..0|)_B (x) |t=0><t=0|_C instead of the
    // per-qubit penalty sum.  The product form is neither local nor does it
    // pin a unique start state; it exists for side-by-side spectra only.
    bool product_form_h_in = false;
};

// Four components in unary term form plus everything needed to materialize
// either backend.  total = delta * (h_in + h_prop + h_stab) + h_out.
struct ClockHamiltonian {
    qc::IdledCircuit idled;
    double delta = 1.0;
    Backend backend = Backend::direct;
    Layout layout;
    ham::Hamiltonian h_in, h_prop, h_stab, h_out;  // unary, weight-1 components

    ham::Hamiltonian total_hamiltonian() const {
        ham::Hamiltonian total(layout.total_unary_qubits());
        auto append = [&total](const ham::Hamiltonian& part, double scale) {
            for (auto t : part.terms) {
                t.weight *= scale;
                total.add(std::move(t));
            }
        };
        append(h_in, delta);
        append(h_prop, delta);
        append(h_stab, delta);
        append(h_out, 1.0);
        return total;
    }
};

// --------------------------- unary construction ------------------------------

namespace detail {

// 2-qubit gate matrices store support[0] in the low local bit; terms keep
// supports sorted ascending, so conjugate by SWAP when the listed order is
// descending.
inline std::pair<std::vector<int>, Matrix> sorted_gate_factor(const qc::Gate& g) {
    if (g.support.size() == 1 || g.support[0] < g.support[1]) return {g.support, g.matrix};
    Matrix swap = Matrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = 1;
    swap(1, 2) = swap(2, 1) = 1;
    return {{g.support[1], g.support[0]}, Matrix(swap * g.matrix * swap)};
}

// H_t on (gate support) x (clock neighborhood); the clock factor sits on the
// high local bits because clock qubits follow all data qubits.
inline ham::InteractionTerm propagation_term(const Layout& lay, const qc::Gate& gate, int t) {
    auto [gsup, gmat] = sorted_gate_factor(gate);
    const Index gdim = gmat.rows();
    const int m = lay.steps;

    std::vector<int> clock_sup;
    Matrix hop;  // |t><t-1| on the clock factor
    Matrix proj; // |t><t| + |t-1><t-1| on the clock factor
    if (m == 1) {
        clock_sup = {lay.clock_qubit(1)};
        hop = Matrix::Zero(2, 2);
        hop(1, 0) = 1.0;
        proj = Matrix::Identity(2, 2);
    } else if (t == 1) {
        clock_sup = {lay.clock_qubit(1), lay.clock_qubit(2)};
        hop = Matrix::Zero(4, 4);
        hop(0b01, 0b00) = 1.0;  // C1: 0 -> 1, C2 stays 0
        proj = Matrix::Zero(4, 4);
        proj(0b00, 0b00) = 1.0;
        proj(0b01, 0b01) = 1.0;
    } else if (t == m) {
        clock_sup = {lay.clock_qubit(m - 1), lay.clock_qubit(m)};
        hop = Matrix::Zero(4, 4);
        hop(0b11, 0b01) = 1.0;  // C_{M-1} stays 1, C_M: 0 -> 1
        proj = Matrix::Zero(4, 4);
        proj(0b01, 0b01) = 1.0;
        proj(0b11, 0b11) = 1.0;
    } else {
        clock_sup = {lay.clock_qubit(t - 1), lay.clock_qubit(t), lay.clock_qubit(t + 1)};
        hop = Matrix::Zero(8, 8);
        hop(0b011, 0b001) = 1.0;  // 100 -> 110 read left-to-right in C_{t-1} C_t C_{t+1}
        proj = Matrix::Zero(8, 8);
        proj(0b001, 0b001) = 1.0;
        proj(0b011, 0b011) = 1.0;
    }

    Matrix mat = 0.5 * ham::kron_lsb(Matrix::Identity(gdim, gdim), proj) -
                 0.5 * ham::kron_lsb(gmat, hop) -
                 0.5 * ham::kron_lsb(Matrix(gmat.adjoint()), Matrix(hop.adjoint()));
    std::vector<int> support = gsup;
    support.insert(support.end(), clock_sup.begin(), clock_sup.end());
    return ham::InteractionTerm(std::move(support), std::move(mat), 1.0);
}

} // namespace detail

inline ClockHamiltonian build_clock_hamiltonian(const qc::IdledCircuit& idled, double delta,
                                                Backend backend, const ClockOptions& opts = {},
                                                const Caps& caps = default_caps()) {
    idled.validate();
    if (delta <= 0.0) throw ValidationError("clock scaling Delta must be positive");

    ClockHamiltonian ch;
    ch.idled = idled;
    ch.delta = delta;
    ch.backend = backend;
    ch.layout = Layout{idled.base.n_input, idled.base.n_ancilla, idled.total_gates()};
    const Layout& lay = ch.layout;
    const int m = lay.steps;

    if (backend == Backend::unary && lay.total_unary_qubits() + 1 > 22)
        throw CapacityError("unary clock backend capped at n + M + 1 <= 22 qubits");
    if (backend == Backend::direct &&
        static_cast<std::uint64_t>(lay.direct_dim()) > (std::uint64_t{1} << 22))
        throw CapacityError("direct clock backend capped at 2^n (M+1) <= 2^22");

    const int n = lay.data_qubits();
    const int c1 = lay.clock_qubit(1);
    const int cm = lay.clock_qubit(m);

    // H_in: per-qubit penalties against the wrong start state, active at t=0.
    ch.h_in = ham::Hamiltonian(lay.total_unary_qubits());
    if (!opts.product_form_h_in) {
        for (int i = 0; i < lay.n_input; ++i) {
            const int wrong = idled.base.input_x[static_cast<std::size_t>(i)] == '1' ? 0 : 1;
            ch.h_in.add(ham::InteractionTerm({i, c1},
                                             ham::kron_lsb(ham::ket_bra(wrong), ham::ket_bra(0))));
        }
        for (int j = lay.n_input; j < n; ++j)
            ch.h_in.add(
                ham::InteractionTerm({j, c1}, ham::kron_lsb(ham::ket_bra(1), ham::ket_bra(0))));
    } else {
        if (n + 1 > 6)
            throw CapacityError("product-form H_in only fits terms with n + 1 <= 6 qubits");
        if (lay.n_input >= 1 && lay.n_ancilla >= 1) {
            const Index da = Index{1} << lay.n_input;
            const Index db = Index{1} << lay.n_ancilla;
            Matrix pa = Matrix::Identity(da, da);
            const Index xi = static_cast<Index>(from_bit_string(idled.base.input_x));
            pa(xi, xi) = 0.0;
            Matrix pb = Matrix::Identity(db, db);
            pb(0, 0) = 0.0;
            std::vector<int> sup;
            for (int q = 0; q < n; ++q) sup.push_back(q);
            sup.push_back(c1);
            ch.h_in.add(ham::InteractionTerm(
                std::move(sup), ham::kron_lsb(ham::kron_lsb(pa, pb), ham::ket_bra(0))));
        }
        // an empty A or B register zeroes the printed product form
    }

    // H_out: |0><0| on the output qubit at t=M.
    ch.h_out = ham::Hamiltonian(lay.total_unary_qubits());
    ch.h_out.add(ham::InteractionTerm({idled.base.output_qubit, cm},
                                      ham::kron_lsb(ham::ket_bra(0), ham::ket_bra(1))));

    // H_stab: penalize the illegal substring 0 at C_j followed by 1 at C_{j+1}.
    ch.h_stab = ham::Hamiltonian(lay.total_unary_qubits());
    for (int j = 1; j <= m - 1; ++j)
        ch.h_stab.add(ham::InteractionTerm({lay.clock_qubit(j), lay.clock_qubit(j + 1)},
                                           ham::kron_lsb(ham::ket_bra(0), ham::ket_bra(1))));

    // H_prop: one term per step.
    ch.h_prop = ham::Hamiltonian(lay.total_unary_qubits());
    for (int t = 1; t <= m; ++t) ch.h_prop.add(detail::propagation_term(lay, idled.gate(t), t));

    ch.h_in.validate();
    ch.h_out.validate();
    ch.h_stab.validate();
    ch.h_prop.validate();
    (void)caps;
    return ch;
}

inline double recommended_delta(int steps) {
    if (steps < 1) throw ValidationError("recommended_delta needs M >= 1");
    const double m = static_cast<double>(steps);
    return 16.0 * 64.0 * m * m / (std::numbers::pi * std::numbers::pi);
}

// --------------------------- direct backend ----------------------------------

enum class Component { in, prop, stab, out };

// Components on C^(2^n) (x) C^(M+1); index = t * 2^n + data.  The direct space
// is exactly the legal clock subspace, so the stabilizer component vanishes.
inline SparseMatrix component_direct(const ClockHamiltonian& ch, Component which) {
    const Layout& lay = ch.layout;
    const Index d2 = lay.data_dim();
    const Index dim = lay.direct_dim();
    std::vector<Eigen::Triplet<Complex>> trips;

    switch (which) {
        case Component::stab:
            break;
        case Component::in: {
            const auto& base = ch.idled.base;
            for (Index i = 0; i < d2; ++i) {
                double v = 0.0;
                for (int a = 0; a < lay.n_input; ++a) {
                    const int want = base.input_x[static_cast<std::size_t>(a)] == '1' ? 1 : 0;
                    if (get_bit(static_cast<std::uint64_t>(i), a) != want) v += 1.0;
                }
                for (int b = lay.n_input; b < lay.data_qubits(); ++b)
                    if (get_bit(static_cast<std::uint64_t>(i), b) == 1) v += 1.0;
                if (v != 0.0) trips.emplace_back(i, i, Complex(v, 0));
            }
            break;
        }
        case Component::out: {
            const Index base = Index{lay.steps} * d2;
            for (Index i = 0; i < d2; ++i)
                if (get_bit(static_cast<std::uint64_t>(i), ch.idled.base.output_qubit) == 0)
                    trips.emplace_back(base + i, base + i, Complex(1, 0));
            break;
        }
        case Component::prop: {
            const int n = lay.data_qubits();
            for (int t = 1; t <= lay.steps; ++t) {
                const qc::Gate g = ch.idled.gate(t);
                const Index row0 = Index{t} * d2;
                const Index col0 = Index{t - 1} * d2;
                for (Index i = 0; i < d2; ++i) {
                    trips.emplace_back(col0 + i, col0 + i, Complex(0.5, 0));
                    trips.emplace_back(row0 + i, row0 + i, Complex(0.5, 0));
                }
                // -1/2 U_t |t><t-1| and its adjoint
                std::uint64_t mask = 0;
                for (int q : g.support) mask |= std::uint64_t{1} << q;
                (void)n;
                for (Index col = 0; col < d2; ++col) {
                    std::uint64_t lc = 0;
                    for (std::size_t j = 0; j < g.support.size(); ++j)
                        lc |= static_cast<std::uint64_t>(
                                  get_bit(static_cast<std::uint64_t>(col), g.support[j]))
                              << j;
                    const std::uint64_t rest = static_cast<std::uint64_t>(col) & ~mask;
                    const Index ldim = Index{1} << g.support.size();
                    for (Index lr = 0; lr < ldim; ++lr) {
                        const Complex v = g.matrix(lr, static_cast<Index>(lc));
                        if (v == Complex(0, 0)) continue;
                        std::uint64_t row = rest;
                        for (std::size_t j = 0; j < g.support.size(); ++j)
                            row = set_bit(row, g.support[j], get_bit(static_cast<std::uint64_t>(lr), static_cast<int>(j)));
                        trips.emplace_back(row0 + static_cast<Index>(row), col0 + col,
                                           -0.5 * v);
                        trips.emplace_back(col0 + col, row0 + static_cast<Index>(row),
                                           -0.5 * std::conj(v));
                    }
                }
            }
            break;
        }
    }
    SparseMatrix out(dim, dim);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

inline SparseMatrix h0_direct(const ClockHamiltonian& ch) {
    return SparseMatrix(component_direct(ch, Component::in) +
                        component_direct(ch, Component::prop) +
                        component_direct(ch, Component::stab));
}

inline SparseMatrix total_direct(const ClockHamiltonian& ch) {
    return SparseMatrix(ch.delta * h0_direct(ch) + component_direct(ch, Component::out));
}

// Isometry from the direct space onto the legal unary subspace: column
// t * 2^n + i maps to the basis state (data bits i, clock 1^t 0^(M-t)).
inline SparseMatrix legal_isometry(const Layout& lay) {
    const Index rows = Index{1} << lay.total_unary_qubits();
    const Index cols = lay.direct_dim();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int t = 0; t <= lay.steps; ++t) {
        const std::uint64_t cbits = lay.unary_clock_bits(t);
        for (Index i = 0; i < lay.data_dim(); ++i)
            trips.emplace_back(static_cast<Index>(cbits | static_cast<std::uint64_t>(i)),
                               Index{t} * lay.data_dim() + i, Complex(1, 0));
    }
    SparseMatrix w(rows, cols);
    w.setFromTriplets(trips.begin(), trips.end());
    w.makeCompressed();
    return w;
}

// --------------------------- states ------------------------------------------

// (1/sqrt(M+1)) sum_t U_t ... U_1 |x>_A |0>_B (x) |t>_C in the direct space.
inline Vector history_state_direct(const ClockHamiltonian& ch) {
    const Layout& lay = ch.layout;
    Vector psi = Vector::Zero(lay.direct_dim());
    Vector data = qc::initial_state(ch.idled.base);
    const double scale = 1.0 / std::sqrt(static_cast<double>(lay.steps + 1));
    psi.segment(0, lay.data_dim()) = scale * data;
    for (int t = 1; t <= lay.steps; ++t) {
        qc::apply_gate_in_place(data, ch.idled.gate(t), lay.data_qubits());
        psi.segment(Index{t} * lay.data_dim(), lay.data_dim()) = scale * data;
    }
    return psi;
}

inline Vector history_state_unary(const ClockHamiltonian& ch) {
    return Vector(legal_isometry(ch.layout) * history_state_direct(ch));
}

inline Vector history_state(const ClockHamiltonian& ch) {
    return ch.backend == Backend::direct ? history_state_direct(ch) : history_state_unary(ch);
}

// |u> = (1/sqrt(N)) sum_{t=1}^{N} |x>_A |0>_B |t>_C as a subset state over the
// unary register layout.
inline guide::SubsetState guiding_state_subset(const ClockHamiltonian& ch) {
    const int n_idle = ch.idled.idle_steps;
    if (n_idle < 1)
        throw ValidationError("guiding state needs at least one idle step (N >= 1)");
    const Layout& lay = ch.layout;
    const std::uint64_t data_bits = from_bit_string(ch.idled.base.input_x);
    std::vector<std::uint64_t> strings;
    for (int t = 1; t <= n_idle; ++t) strings.push_back(data_bits | lay.unary_clock_bits(t));
    return guide::SubsetState(lay.total_unary_qubits(), std::move(strings));
}

inline Vector guiding_state_direct(const ClockHamiltonian& ch) {
    const int n_idle = ch.idled.idle_steps;
    if (n_idle < 1)
        throw ValidationError("guiding state needs at least one idle step (N >= 1)");
    const Layout& lay = ch.layout;
    Vector u = Vector::Zero(lay.direct_dim());
    const Index x = static_cast<Index>(from_bit_string(ch.idled.base.input_x));
    const double amp = 1.0 / std::sqrt(static_cast<double>(n_idle));
    for (int t = 1; t <= n_idle; ++t) u(Index{t} * lay.data_dim() + x) = amp;
    return u;
}

// --------------------------- certificates and reports ------------------------

struct GapReport {
    int steps = 0;
    double lambda0 = 0.0;        // smallest eigenvalue of H_0 on the legal subspace
    double lambda1 = 0.0;        // smallest nonzero eigenvalue
    double gap = 0.0;
    double threshold = 0.0;      // pi^2 / (64 M^2)
    bool ok = false;
};

// Smallest nonzero eigenvalue of H_in + H_prop + H_stab on the legal clock
// subspace (the direct space), against pi^2/(64 M^2).
inline GapReport gap_certificate(const ClockHamiltonian& ch,
                                 const spectra::SolverOptions& opts = {},
                                 const Caps& caps = default_caps()) {
    const int m = ch.layout.steps;
    SparseMatrix h0 = h0_direct(ch);
    const int want = std::min<Index>(h0.rows(), 8);
    spectra::SolverOptions o = opts;
    o.want_vectors = false;
    auto r = spectra::low_spectrum(h0, want, o, caps);

    GapReport rep;
    rep.steps = m;
    rep.threshold = std::numbers::pi * std::numbers::pi / (64.0 * m * m);
    rep.lambda0 = r.eigenvalues[0];
    const double zero_tol = 1e-10 * std::max(1.0, r.norm_estimate);
    double lam1 = 0.0;
    bool found = false;
    for (double v : r.eigenvalues) {
        if (v > zero_tol) {
            lam1 = v;
            found = true;
            break;
        }
    }
    if (!found)
        throw ConvergenceError("gap_certificate: no nonzero eigenvalue in the computed window");
    rep.lambda1 = lam1;
    rep.gap = rep.lambda1 - rep.lambda0;
    rep.ok = rep.lambda1 > rep.threshold;
    return rep;
}

struct ClockReport {
    int steps = 0;
    int idle_steps = 0;
    double delta = 0.0;
    std::string backend;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double gap = 0.0;
    double overlap_hist = 0.0;      // |<u|psi_hist>|^2
    double ground_fidelity = 0.0;   // |<u|g>|^2
    double a = 0.0, b = 0.0;        // thresholds before normalization
    double normalization_factor = 1.0;
};

// Builds the decision-problem instance: the 5-local unary Hamiltonian
// normalized to norm bound <= 1, the subset guiding state, thresholds
// a = 1/(4(M+1)) and b = 3/(4(M+1)) rescaled by the same factor, and the
// promised fidelity taken from the measured guide/ground overlap.
inline std::pair<spectra::GLHLEInstance, ClockReport> make_clock_instance(
    const ClockHamiltonian& ch, const spectra::SolverOptions& opts = {},
    const Caps& caps = default_caps()) {
    const Layout& lay = ch.layout;
    const int m = lay.steps;

    SparseMatrix total = total_direct(ch);
    spectra::SolverOptions o = opts;
    o.want_vectors = true;
    auto r = spectra::low_spectrum(total, std::min<Index>(total.rows(), 6), o, caps);

    Vector u = guiding_state_direct(ch);
    Vector hist = history_state_direct(ch);

    ClockReport rep;
    rep.steps = m;
    rep.idle_steps = ch.idled.idle_steps;
    rep.delta = ch.delta;
    rep.backend = to_string(ch.backend);
    rep.lambda0 = r.eigenvalues[0];
    rep.lambda1 = r.eigenvalues.size() > 1 ? r.eigenvalues[1] : r.eigenvalues[0];
    rep.gap = rep.lambda1 - rep.lambda0;
    rep.overlap_hist = std::norm((u.adjoint() * hist)(0, 0));
    rep.ground_fidelity = std::norm((u.adjoint() * r.eigenvectors.col(0))(0, 0));
    rep.a = 1.0 / (4.0 * (m + 1));
    rep.b = 3.0 / (4.0 * (m + 1));

    auto normalized = ham::normalize(ch.total_hamiltonian());
    rep.normalization_factor = normalized.factor;

    spectra::GLHLEInstance inst;
    inst.hamiltonian = std::move(normalized.hamiltonian);
    inst.guide = guiding_state_subset(ch);
    inst.c = 0;
    inst.a = rep.a / normalized.factor;
    inst.b = rep.b / normalized.factor;
    inst.delta_fid = std::max(1e-9, rep.ground_fidelity - 1e-9);
    inst.normalization_factor = normalized.factor;
    return {std::move(inst), rep};
}

} // namespace glh::clock
