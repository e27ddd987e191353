// excited.hpp — lifting a ground-state instance to a c-th excited-state
// instance on one extra qubit: the diagonal ladder H^(z) with exactly c
// negative levels, the affine rescaling H^(s) of the base Hamiltonian, and the
// combined selector-qubit gadget with the guiding state u (x) |1>.

#pragma once

#include "glh/common.hpp"
#include "glh/guide_states.hpp"
#include "glh/hamiltonian.hpp"
#include "glh/spectra.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace glh::excited {

struct AffineMap {
    double scale = 1.0;
    double offset = 0.0;
    double operator()(double x) const { return scale * x + offset; }
};

// Diagonal ladder on qubits 0..n (n+1 qubits, following the printed index
// ranges): sum_{i<=d} 2^i |1><1|_i + sum_{d<i<=n} 2^(d+1) |1><1|_i minus
// (c - 1/2) I, with d = ceil(log2 c).  Exactly c eigenvalues are negative,
// the smallest is -c + 1/2, integers step the spectrum, and the largest
// negative / smallest non-negative values are -1/2 and +1/2.
inline ham::Hamiltonian build_ladder(int n, long c) {
    if (n < 0) throw ValidationError("build_ladder: highest index must be >= 0");
    if (n > 40) throw CapacityError("build_ladder: register too large");
    if (c < 1) throw ValidationError("build_ladder: need c >= 1");
    const int d = static_cast<int>(std::ceil(std::log2(static_cast<double>(c))));
    // the c negative states live on the binary qubits 0..d, so they must fit
    if (d > n)
        throw ValidationError("build_ladder: c negative states do not fit on the register");

    ham::Hamiltonian hz(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double w = (i <= d) ? std::ldexp(1.0, i) : std::ldexp(1.0, d + 1);
        hz.add(ham::InteractionTerm({i}, ham::ket_bra(1), w));
    }
    // constant shift, carried on qubit 0 so the Hamiltonian stays a term list
    hz.add(ham::InteractionTerm({0}, Matrix::Identity(2, 2),
                                -(static_cast<double>(c) - 0.5)));
    return hz;
}

enum class NormMode { true_norm, term_bound };

struct RescaledBase {
    ham::Hamiltonian hamiltonian;
    AffineMap map;          // eigenvalue transport lambda -> map(lambda)
    double norm_used = 0.0;
};

// H^(s) = (1/2) (H + I/4) / (||H|| + 1/4) - (1/4) I applied term-wise.  The
// map is strictly increasing, so eigenvector order is preserved.  With the
// true spectral norm the image lies in [-1/4, 1/4] whenever the spectrum of H
// is >= -1/4 (clock instances are positive semidefinite); callers that need
// the containment must check lambda_min themselves.
inline RescaledBase build_rescaled_base(const ham::Hamiltonian& h,
                                        NormMode mode = NormMode::true_norm,
                                        const Caps& caps = default_caps()) {
    h.validate();
    double norm = 0.0;
    if (mode == NormMode::true_norm) {
        auto sp = ham::assemble_sparse(h, caps);
        auto low = spectra::low_spectrum(sp, 1, {}, caps);
        auto negated = spectra::low_spectrum(SparseMatrix(-sp), 1, {}, caps);
        norm = std::max(std::abs(low.eigenvalues[0]), std::abs(negated.eigenvalues[0]));
    } else {
        norm = ham::operator_norm_bound(h);
    }
    if (norm <= 0.0) throw ValidationError("build_rescaled_base: zero Hamiltonian");

    RescaledBase out;
    out.norm_used = norm;
    out.map.scale = 0.5 / (norm + 0.25);
    out.map.offset = 0.5 * 0.25 / (norm + 0.25) - 0.25;
    out.hamiltonian = h;
    for (auto& t : out.hamiltonian.terms) t.weight *= out.map.scale;
    out.hamiltonian.add(
        ham::InteractionTerm({0}, Matrix::Identity(2, 2), out.map.offset));
    out.hamiltonian.family_tag.reset();
    return out;
}

struct ExcitedGadget {
    long c = 0;
    int d = 0;
    int branch_qubits = 0;      // max(n, d + 1): the ladder needs d+1 binary qubits
    ham::Hamiltonian hz;        // ladder on the branch register
    ham::Hamiltonian hs;        // rescaled base on the first n qubits
    ham::Hamiltonian combined;  // hz (x) |0><0|_sel + hs (x) |1><1|_sel
    AffineMap map;              // lambda_c(combined) = map(lambda_0(base))
    double base_norm = 0.0;
};

// Builds H^(c) = H^(z) (x) |0><0| + H^(s) (x) |1><1| with the selector as the
// new highest qubit.  When the ladder's d+1 binary qubits do not fit in the
// base register, the branch is padded with identity qubits; the level values,
// the 1/4 gap, and the lifted guide's fidelity are unaffected.  Requires
// eig(H^(s)) inside [-1/4, 1/4], which holds exactly when
// lambda_min(H) >= -1/4.
inline ExcitedGadget build_excited_gadget(const ham::Hamiltonian& h, long c,
                                          NormMode mode = NormMode::true_norm,
                                          const Caps& caps = default_caps()) {
    h.validate();
    const int n = h.n_qubits;
    if (c < 1 || (n < 62 && c > (long{1} << n) - 1))
        throw ValidationError("excited gadget: need 1 <= c <= 2^n - 1");

    ExcitedGadget g;
    g.c = c;
    g.d = static_cast<int>(std::ceil(std::log2(static_cast<double>(c))));
    g.branch_qubits = std::max(n, g.d + 1);
    g.hz = build_ladder(g.branch_qubits - 1, c);
    auto rescaled = build_rescaled_base(h, mode, caps);
    g.hs = rescaled.hamiltonian;
    g.map = rescaled.map;
    g.base_norm = rescaled.norm_used;

    // containment check: the gadget's level counting needs eig(hs) in [-1/4, 1/4]
    const double lambda_min = spectra::low_spectrum(h, 1, {}, caps).eigenvalues[0];
    if (g.map(lambda_min) < -0.25 - 1e-12)
        throw ValidationError("excited gadget: spectrum of H extends below -1/4, the "
                              "rescaled base escapes [-1/4, 1/4]");

    const int sel = g.branch_qubits;  // selector qubit index
    g.combined = ham::Hamiltonian(g.branch_qubits + 1);
    for (const auto& t : g.hz.terms) {
        std::vector<int> sup = t.support;
        sup.push_back(sel);
        g.combined.add(ham::InteractionTerm(std::move(sup),
                                            ham::kron_lsb(t.matrix, ham::ket_bra(0)), t.weight));
    }
    for (const auto& t : g.hs.terms) {
        std::vector<int> sup = t.support;
        sup.push_back(sel);
        g.combined.add(ham::InteractionTerm(std::move(sup),
                                            ham::kron_lsb(t.matrix, ham::ket_bra(1)), t.weight));
    }
    return g;
}

struct LiftResult {
    spectra::GLHLEInstance instance;
    ExcitedGadget gadget;
    double normalization_factor = 1.0;  // applied on top of the gadget's affine map
};

namespace detail {

// Appends pad_zeros fixed |0> qubits and then the fixed selector |1>.
inline spectra::GuideState append_selector(const spectra::GuideState& g, int pad_zeros) {
    const guide::SubsetState tail(pad_zeros + 1, {std::uint64_t{1} << pad_zeros});
    if (std::holds_alternative<guide::SubsetState>(g))
        return guide::attach_subset(std::get<guide::SubsetState>(g), tail);
    const auto& enc = std::get<guide::EncodedState>(g);
    guide::SubsetState newbase = guide::attach_subset(enc.base, tail);
    std::vector<guide::BlockIsometry> iso = enc.isometries;
    for (int i = 0; i <= pad_zeros; ++i) iso.push_back(guide::trivial_isometry());
    return guide::EncodedState(std::move(newbase), std::move(iso));
}

} // namespace detail

// Lifts a ground-state instance to level c: combined Hamiltonian on n+1
// qubits, guide u (x) |1>, thresholds pushed through the affine map, and a
// final normalization back to norm bound <= 1.  c = 0 returns the input.
inline LiftResult lift_instance(const spectra::GLHLEInstance& inst, long c,
                                NormMode mode = NormMode::true_norm,
                                const Caps& caps = default_caps()) {
    inst.validate(caps);
    if (inst.c != 0) throw ValidationError("lift_instance expects a ground-state (c = 0) instance");
    if (c == 0) return LiftResult{inst, {}, 1.0};

    LiftResult out;
    out.gadget = build_excited_gadget(inst.hamiltonian, c, mode, caps);

    auto normalized = ham::normalize(out.gadget.combined);
    out.normalization_factor = normalized.factor;

    out.instance.hamiltonian = std::move(normalized.hamiltonian);
    out.instance.guide = detail::append_selector(
        inst.guide, out.gadget.branch_qubits - inst.hamiltonian.n_qubits);
    out.instance.c = c;
    out.instance.a = out.gadget.map(inst.a) / normalized.factor;
    out.instance.b = out.gadget.map(inst.b) / normalized.factor;
    out.instance.delta_fid = inst.delta_fid;
    out.instance.normalization_factor = inst.normalization_factor *
                                        normalized.factor / out.gadget.map.scale;
    return out;
}

} // namespace glh::excited
