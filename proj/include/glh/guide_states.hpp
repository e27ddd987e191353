// guide_states.hpp — semi-classical subset states and encoded states, exact
// amplitude evaluation, the bit-by-bit conditional sampler, and the encoding
// transforms (Cartesian attachment, product-state attachment, local
// isometries, the Heisenberg 1-to-4 code).

#pragma once

#include "glh/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

namespace glh::guide {

// --------------------------- SubsetState -------------------------------------

// Uniform superposition over a set of n-bit strings.  Strings are stored
// sorted ascending so serialization is canonical.
struct SubsetState {
    int n_qubits = 0;
    std::vector<std::uint64_t> subset;

    SubsetState() = default;
    SubsetState(int n, std::vector<std::uint64_t> s, const Caps& caps = default_caps())
        : n_qubits(n), subset(std::move(s)) {
        std::sort(subset.begin(), subset.end());
        validate(caps);
    }

    std::size_t size() const { return subset.size(); }

    void validate(const Caps& caps = default_caps()) const {
        if (n_qubits < 1 || n_qubits > 64)
            throw ValidationError("subset state needs 1..64 qubits");
        if (subset.empty()) throw ValidationError("subset state must not be empty");
        if (subset.size() > caps.subset_size_cap)
            throw CapacityError("subset size exceeds the configured cap");
        const std::uint64_t lim =
            (n_qubits == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_qubits) - 1);
        std::uint64_t prev = 0;
        bool first = true;
        for (std::uint64_t x : subset) {
            if (x > lim) throw ValidationError("subset string exceeds qubit count");
            if (!first && x == prev) throw ValidationError("duplicate subset string");
            prev = x;
            first = false;
        }
    }
};

inline Complex amplitude(const SubsetState& st, std::uint64_t x) {
    if (st.n_qubits < 64 && (x >> st.n_qubits) != 0)
        throw ValidationError("amplitude: bit string longer than the state register");
    const bool member = std::binary_search(st.subset.begin(), st.subset.end(), x);
    return member ? Complex(1.0 / std::sqrt(static_cast<double>(st.size())), 0.0) : Complex(0.0, 0.0);
}

// Cartesian product S x S'; the attached register occupies the high bits.
inline SubsetState attach_subset(const SubsetState& base, const SubsetState& other,
                                 const Caps& caps = default_caps()) {
    base.validate(caps);
    other.validate(caps);
    if (base.n_qubits + other.n_qubits > 64)
        throw CapacityError("attach_subset: combined register exceeds 64 qubits");
    const std::uint64_t count =
        static_cast<std::uint64_t>(base.size()) * static_cast<std::uint64_t>(other.size());
    if (count > caps.subset_size_cap)
        throw CapacityError("attach_subset: product subset exceeds the configured cap");
    std::vector<std::uint64_t> out;
    out.reserve(count);
    for (std::uint64_t b : other.subset)
        for (std::uint64_t a : base.subset) out.push_back(a | (b << base.n_qubits));
    return SubsetState(base.n_qubits + other.n_qubits, std::move(out), caps);
}

// --------------------------- EncodedState ------------------------------------

// Isometry from one qubit into a block of qubits_out qubits (2^k x 2 matrix).
struct BlockIsometry {
    int qubits_out = 1;
    Matrix matrix = Matrix::Identity(2, 2);

    BlockIsometry() = default;
    BlockIsometry(int k, Matrix m) : qubits_out(k), matrix(std::move(m)) { validate(); }

    bool is_trivial() const {
        return qubits_out == 1 && (matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14;
    }

    void validate() const {
        if (qubits_out < 1 || qubits_out > 4)
            throw ValidationError("block isometry must output 1..4 qubits");
        const Index rows = Index{1} << qubits_out;
        if (matrix.rows() != rows || matrix.cols() != 2)
            throw ValidationError("block isometry matrix must be 2^k x 2");
        Matrix g = matrix.adjoint() * matrix;
        if ((g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() > kHermitianTol)
            throw ValidationError("block map is not an isometry (V^dag V != I)");
    }
};

inline BlockIsometry trivial_isometry() { return BlockIsometry(1, Matrix::Identity(2, 2)); }

// Completes a normalized k-qubit state into an isometry whose first column is
// the state.  Deterministic: the second column is the orthogonalized basis
// vector with the smallest overlap.
inline BlockIsometry isometry_from_state(const Vector& state) {
    const Index dim = state.size();
    int k = 0;
    while ((Index{1} << k) < dim) ++k;
    if ((Index{1} << k) != dim || k < 1 || k > 4)
        throw ValidationError("block state dimension must be 2^k with k in 1..4");
    if (std::abs(state.norm() - 1.0) > 1e-10)
        throw ValidationError("block state is not normalized");
    Index pick = 0;
    double best = 2.0;
    for (Index i = 0; i < dim; ++i) {
        const double ov = std::abs(state(i));
        if (ov < best) {
            best = ov;
            pick = i;
        }
    }
    Vector e = Vector::Zero(dim);
    e(pick) = 1.0;
    Vector other = e - state * (state.adjoint() * e)(0, 0);
    other.normalize();
    Matrix m(dim, 2);
    m.col(0) = state;
    m.col(1) = other;
    return BlockIsometry(k, std::move(m));
}

// Subset state pushed through per-base-qubit isometries.  Block i encodes base
// qubit i; block outputs are laid out in base-qubit order, so the first block
// holds the lowest output bits.
struct EncodedState {
    SubsetState base;
    std::vector<BlockIsometry> isometries;

    EncodedState() = default;
    EncodedState(SubsetState b, std::vector<BlockIsometry> iso)
        : base(std::move(b)), isometries(std::move(iso)) {
        validate();
    }

    int total_qubits() const {
        int m = 0;
        for (const auto& v : isometries) m += v.qubits_out;
        return m;
    }

    bool all_trivial() const {
        for (const auto& v : isometries)
            if (!v.is_trivial()) return false;
        return true;
    }

    void validate(const Caps& caps = default_caps()) const {
        base.validate(caps);
        if (static_cast<int>(isometries.size()) != base.n_qubits)
            throw ValidationError("need exactly one isometry per base qubit");
        int m = 0;
        for (const auto& v : isometries) {
            v.validate();
            m += v.qubits_out;
        }
        if (m > 64) throw CapacityError("encoded state exceeds 64 output qubits");
        if (m > 4 * base.n_qubits)
            throw ValidationError("encoded state exceeds the 4n output-qubit bound");
    }
};

inline EncodedState from_subset(const SubsetState& st) {
    std::vector<BlockIsometry> iso(static_cast<std::size_t>(st.n_qubits), trivial_isometry());
    return EncodedState(st, std::move(iso));
}

inline std::optional<SubsetState> as_subset(const EncodedState& st) {
    if (!st.all_trivial()) return std::nullopt;
    return st.base;
}

inline Complex amplitude(const EncodedState& st, std::uint64_t x) {
    const int n = st.base.n_qubits;
    const int m = st.total_qubits();
    if (m < 64 && (x >> m) != 0)
        throw ValidationError("amplitude: bit string longer than the state register");
    Complex total(0.0, 0.0);
    for (std::uint64_t s : st.base.subset) {
        Complex prod(1.0, 0.0);
        int offset = 0;
        for (int i = 0; i < n && prod != Complex(0.0, 0.0); ++i) {
            const auto& v = st.isometries[static_cast<std::size_t>(i)];
            const std::uint64_t block_bits =
                (x >> offset) & ((std::uint64_t{1} << v.qubits_out) - 1);
            prod *= v.matrix(static_cast<Index>(block_bits), static_cast<Index>((s >> i) & 1u));
            offset += v.qubits_out;
        }
        total += prod;
    }
    return total / std::sqrt(static_cast<double>(st.base.size()));
}

inline Vector to_statevector(const EncodedState& st, const Caps& caps = default_caps()) {
    const int m = st.total_qubits();
    if (m > caps.simulate_max_qubits)
        throw CapacityError("to_statevector: state exceeds the dense cap");
    const Index dim = Index{1} << m;
    Vector out = Vector::Zero(dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(st.base.size()));
    for (std::uint64_t s : st.base.subset) {
        Vector acc(1);
        acc(0) = scale;
        for (int i = 0; i < st.base.n_qubits; ++i) {
            const auto& v = st.isometries[static_cast<std::size_t>(i)];
            const Vector col = v.matrix.col(static_cast<Index>((s >> i) & 1u));
            Vector next(acc.size() * col.size());
            for (Index hi = 0; hi < col.size(); ++hi)
                next.segment(hi * acc.size(), acc.size()) = col(hi) * acc;
            acc.swap(next);
        }
        out += acc;
    }
    return out;
}

inline Vector to_statevector(const SubsetState& st, const Caps& caps = default_caps()) {
    return to_statevector(from_subset(st), caps);
}

// --------------------------- encoding transforms -----------------------------

// Appends product blocks V'_j|0>; the base subset gains one fixed 0 bit per
// block, so a subset description stays a subset description when the blocks
// are trivial.
inline EncodedState attach_product(const EncodedState& st, const std::vector<BlockIsometry>& blocks,
                                   const Caps& caps = default_caps()) {
    st.validate(caps);
    SubsetState base = st.base;
    std::vector<BlockIsometry> iso = st.isometries;
    for (const auto& b : blocks) {
        b.validate();
        if (std::abs(b.matrix.col(0).norm() - 1.0) > 1e-10)
            throw ValidationError("attach_product: block state is not normalized");
        base.n_qubits += 1;  // strings keep their value: the new high bit is 0
        iso.push_back(b);
    }
    if (base.n_qubits > 64) throw CapacityError("attach_product: exceeds 64 base qubits");
    return EncodedState(std::move(base), std::move(iso));
}

// Composes W onto block i: V_i <- W V_i.  W must accept the block's current
// output dimension; composing onto a trivial block is plain replacement.
inline EncodedState apply_local_isometry(const EncodedState& st, int block_index, const Matrix& w) {
    if (block_index < 0 || block_index >= st.base.n_qubits)
        throw ValidationError("apply_local_isometry: block index out of range");
    const auto& v = st.isometries[static_cast<std::size_t>(block_index)];
    if (w.cols() != v.matrix.rows())
        throw ValidationError("apply_local_isometry: shape does not compose with the block");
    Matrix g = w.adjoint() * w;
    if ((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > kHermitianTol)
        throw ValidationError("apply_local_isometry: W is not an isometry");
    int k = 0;
    while ((Index{1} << k) < w.rows()) ++k;
    if ((Index{1} << k) != w.rows()) throw ValidationError("apply_local_isometry: rows not 2^k");
    EncodedState out = st;
    out.isometries[static_cast<std::size_t>(block_index)] = BlockIsometry(k, w * v.matrix);
    out.validate();
    return out;
}

// |Psi_-> = (|01> - |10>)/sqrt(2), first-listed qubit in the low bit.
inline Vector singlet_state() {
    Vector v = Vector::Zero(4);
    v(2) = 1.0 / std::sqrt(2.0);   // first qubit 0, second qubit 1
    v(1) = -1.0 / std::sqrt(2.0);  // first qubit 1, second qubit 0
    return v;
}

// 1-qubit-to-4-qubit code used by the Heisenberg/XY subspace encoding:
//   V|0> = |Psi_->_{13} |Psi_->_{24}
//   V|1> = (2/sqrt(3)) |Psi_->_{12} |Psi_->_{34} - (1/sqrt(3)) |Psi_->_{13} |Psi_->_{24}
// Block qubits 0..3 stand for the listed qubits 1..4.
inline BlockIsometry heisenberg_code_isometry() {
    const double s = 1.0 / std::sqrt(2.0);
    auto psi = [s](int a, int b) -> double {
        if (a == 0 && b == 1) return s;
        if (a == 1 && b == 0) return -s;
        return 0.0;
    };
    Matrix m = Matrix::Zero(16, 2);
    for (int idx = 0; idx < 16; ++idx) {
        const int b1 = (idx >> 0) & 1, b2 = (idx >> 1) & 1, b3 = (idx >> 2) & 1, b4 = (idx >> 3) & 1;
        const double p13_24 = psi(b1, b3) * psi(b2, b4);
        const double p12_34 = psi(b1, b2) * psi(b3, b4);
        m(idx, 0) = p13_24;
        m(idx, 1) = (2.0 / std::sqrt(3.0)) * p12_34 - (1.0 / std::sqrt(3.0)) * p13_24;
    }
    return BlockIsometry(4, std::move(m));
}

// --------------------------- sampling ----------------------------------------

// Draws strings distributed as |<x|u>|^2 by sampling one output bit at a time
// from the exact conditional chain.  Marginals are accumulated per subset
// element grouped by the undetermined suffix, so a draw costs O(|S| * m).
class Sampler {
  public:
    Sampler(EncodedState st, std::uint64_t seed) : state_(std::move(st)), rng_(seed) {
        state_.validate();
    }

    std::uint64_t draw() {
        const int n = state_.base.n_qubits;
        const std::size_t count = state_.base.size();
        std::vector<Complex> prefix(count, Complex(1.0, 0.0));
        std::uint64_t out = 0;
        int out_pos = 0;

        for (int blk = 0; blk < n; ++blk) {
            const auto& v = state_.isometries[static_cast<std::size_t>(blk)];
            const Index bdim = Index{1} << v.qubits_out;
            std::uint64_t block_bits = 0;

            groups_.clear();
            for (std::size_t e = 0; e < count; ++e) {
                const std::uint64_t s = state_.base.subset[e];
                auto& acc = groups_[s >> (blk + 1)];
                acc[(s >> blk) & 1u] += prefix[e];
            }

            for (int bit = 0; bit < v.qubits_out; ++bit) {
                // W_z = V^dag (|y, z><y, z| ⊗ I_rest) V for the two candidates
                double p[2] = {0.0, 0.0};
                for (int z = 0; z < 2; ++z) {
                    std::array<std::array<Complex, 2>, 2> w{};
                    const std::uint64_t fixed =
                        block_bits | (static_cast<std::uint64_t>(z) << bit);
                    const std::uint64_t mask = (std::uint64_t{1} << (bit + 1)) - 1;
                    for (Index mrow = 0; mrow < bdim; ++mrow) {
                        if ((static_cast<std::uint64_t>(mrow) & mask) != fixed) continue;
                        for (int b1 = 0; b1 < 2; ++b1)
                            for (int b0 = 0; b0 < 2; ++b0)
                                w[static_cast<std::size_t>(b1)][static_cast<std::size_t>(b0)] +=
                                    std::conj(v.matrix(mrow, b1)) * v.matrix(mrow, b0);
                    }
                    double total = 0.0;
                    for (const auto& [sig, acc] : groups_) {
                        (void)sig;
                        Complex q = 0.0;
                        for (int b1 = 0; b1 < 2; ++b1)
                            for (int b0 = 0; b0 < 2; ++b0)
                                q += std::conj(acc[static_cast<std::size_t>(b1)]) *
                                     w[static_cast<std::size_t>(b1)][static_cast<std::size_t>(b0)] *
                                     acc[static_cast<std::size_t>(b0)];
                        total += q.real();
                    }
                    p[z] = std::max(total, 0.0);
                }
                // Conditional for bit=1; the unconditioned pair sums to the
                // current prefix probability, which is positive because the
                // prefix itself was sampled.
                const double denom = p[0] + p[1];
                const double p1 = denom > 0.0 ? p[1] / denom : 0.0;
                const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
                const int z = (u < p1) ? 1 : 0;
                block_bits |= static_cast<std::uint64_t>(z) << bit;
                out |= static_cast<std::uint64_t>(z) << (out_pos + bit);
            }

            for (std::size_t e = 0; e < count; ++e) {
                const std::uint64_t s = state_.base.subset[e];
                prefix[e] *= v.matrix(static_cast<Index>(block_bits),
                                      static_cast<Index>((s >> blk) & 1u));
            }
            out_pos += v.qubits_out;
        }
        return out;
    }

    const EncodedState& state() const { return state_; }

  private:
    EncodedState state_;
    std::mt19937_64 rng_;
    std::unordered_map<std::uint64_t, std::array<Complex, 2>> groups_;
};

inline std::vector<std::uint64_t> sample(const EncodedState& st, std::size_t shots,
                                         std::uint64_t seed) {
    Sampler sampler(st, seed);
    std::vector<std::uint64_t> out;
    out.reserve(shots);
    for (std::size_t i = 0; i < shots; ++i) out.push_back(sampler.draw());
    return out;
}

inline std::vector<std::uint64_t> sample(const SubsetState& st, std::size_t shots,
                                         std::uint64_t seed) {
    return sample(from_subset(st), shots, seed);
}

} // namespace glh::guide
