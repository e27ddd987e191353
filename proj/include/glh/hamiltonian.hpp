// hamiltonian.hpp — local Hermitian terms, sparse assembly over the
// computational basis, Pauli decomposition, norm bounds, normalization.

#pragma once

#include "glh/common.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace glh::ham {

// --------------------------- small fixed operators ---------------------------

inline Matrix identity2() { return Matrix::Identity(2, 2); }

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1,
         1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1),
         Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0,
         0, -1;
    return m;
}

inline Matrix pauli_letter(char p) {
    switch (p) {
        case 'I': return identity2();
        case 'X': return pauli_x();
        case 'Y': return pauli_y();
        case 'Z': return pauli_z();
        default: throw ValidationError(std::string("unknown Pauli letter: ") + p);
    }
}

// |b><b| on one qubit
inline Matrix ket_bra(int b) {
    Matrix m = Matrix::Zero(2, 2);
    m(b, b) = 1.0;
    return m;
}

// Kronecker product with qubit 0 as the least significant factor: the qubit
// listed FIRST in a support indexes the low bit, so kron_lsb(A, B) puts A on
// the low bits.
inline Matrix kron_lsb(const Matrix& low, const Matrix& high) {
    Matrix out(low.rows() * high.rows(), low.cols() * high.cols());
    for (Index r = 0; r < high.rows(); ++r)
        for (Index c = 0; c < high.cols(); ++c)
            out.block(r * low.rows(), c * low.cols(), low.rows(), low.cols()) = high(r, c) * low;
    return out;
}

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// --------------------------- InteractionTerm --------------------------------

// One weighted Hermitian operator on an explicit qubit support.  Local index
// j of the matrix corresponds to support[j]; support[0] is the least
// significant local bit.
struct InteractionTerm {
    std::vector<int> support;
    Matrix matrix;
    double weight = 1.0;

    InteractionTerm() = default;

    InteractionTerm(std::vector<int> support_, Matrix matrix_, double weight_ = 1.0)
        : support(std::move(support_)), matrix(std::move(matrix_)), weight(weight_) {
        validate();
    }

    int locality() const { return static_cast<int>(support.size()); }

    void validate() const {
        if (support.empty() || support.size() > 6)
            throw ValidationError("term support must have 1..6 qubits");
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (support[i] < 0) throw ValidationError("negative qubit index in support");
            for (std::size_t j = i + 1; j < support.size(); ++j)
                if (support[i] == support[j])
                    throw ValidationError("duplicate qubit index in term support");
        }
        const Index dim = Index{1} << support.size();
        if (matrix.rows() != dim || matrix.cols() != dim)
            throw ValidationError("term matrix dimension does not match support size");
        if (!is_hermitian(matrix))
            throw ValidationError("term matrix is not Hermitian to 1e-12");
        if (!std::isfinite(weight))
            throw ValidationError("term weight must be finite");
    }
};

// Convenience: a term given by a Pauli word on listed qubits, e.g.
// pauli_term({0,1}, "XX", w).
inline InteractionTerm pauli_term(std::vector<int> support, const std::string& word,
                                  double weight = 1.0) {
    if (support.size() != word.size())
        throw ValidationError("pauli_term: support/word size mismatch");
    Matrix m = pauli_letter(word[0]);
    for (std::size_t i = 1; i < word.size(); ++i) m = kron_lsb(m, pauli_letter(word[i]));
    return InteractionTerm(std::move(support), std::move(m), weight);
}

// --------------------------- Hamiltonian -------------------------------------

struct Hamiltonian {
    int n_qubits = 0;
    std::vector<InteractionTerm> terms;
    std::optional<std::string> family_tag;
    bool positive_weights_only = false;

    Hamiltonian() = default;
    explicit Hamiltonian(int n) : n_qubits(n) {}

    int locality() const {
        int k = 0;
        for (const auto& t : terms) k = std::max(k, t.locality());
        return k;
    }

    Hamiltonian& add(InteractionTerm t) {
        terms.push_back(std::move(t));
        return *this;
    }

    void validate() const {
        if (n_qubits <= 0) throw ValidationError("Hamiltonian needs n_qubits >= 1");
        for (const auto& t : terms) {
            t.validate();
            for (int q : t.support)
                if (q >= n_qubits)
                    throw ValidationError("term support exceeds Hamiltonian qubit count");
            if (positive_weights_only && t.weight < 0)
                throw ValidationError("negative weight in a positive-weights-only Hamiltonian");
        }
    }
};

// --------------------------- sparse assembly --------------------------------

inline std::uint64_t estimated_assembly_nonzeros(const Hamiltonian& h) {
    std::uint64_t total = 0;
    for (const auto& t : h.terms) {
        std::uint64_t nnz = 0;
        for (Index r = 0; r < t.matrix.rows(); ++r)
            for (Index c = 0; c < t.matrix.cols(); ++c)
                if (std::abs(t.matrix(r, c)) > 0.0) ++nnz;
        total += nnz << (h.n_qubits - t.locality());
    }
    return total;
}

// Sum of weight * (term embedded on its support, identity elsewhere).
inline SparseMatrix assemble_sparse(const Hamiltonian& h, const Caps& caps = default_caps()) {
    h.validate();
    if (h.n_qubits > 62) throw CapacityError("assemble_sparse: more than 62 qubits");
    const std::uint64_t budget = caps.assembly_nonzero_budget;
    const std::uint64_t est = estimated_assembly_nonzeros(h);
    const std::uint64_t dim_u = std::uint64_t{1} << h.n_qubits;
    if (est > budget || dim_u > budget)
        throw CapacityError("assemble_sparse: nonzero budget exceeded (" + std::to_string(est) +
                            " > " + std::to_string(budget) + "); raise GLH_DIM_CAP to override");

    const Index dim = static_cast<Index>(dim_u);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(est));

    for (const auto& t : h.terms) {
        const int k = t.locality();
        std::uint64_t support_mask = 0;
        for (int q : t.support) support_mask |= std::uint64_t{1} << q;
        const std::uint64_t rest_mask = (dim_u - 1) & ~support_mask;

        // local index -> global bits scattered onto the support
        const std::uint64_t local_dim = std::uint64_t{1} << k;
        std::vector<std::uint64_t> scatter(local_dim, 0);
        for (std::uint64_t a = 0; a < local_dim; ++a) {
            std::uint64_t g = 0;
            for (int j = 0; j < k; ++j)
                if ((a >> j) & 1u) g |= std::uint64_t{1} << t.support[static_cast<std::size_t>(j)];
            scatter[a] = g;
        }

        for (std::uint64_t a = 0; a < local_dim; ++a) {
            for (std::uint64_t b = 0; b < local_dim; ++b) {
                const Complex v = t.weight * t.matrix(static_cast<Index>(a), static_cast<Index>(b));
                if (v == Complex(0.0, 0.0)) continue;
                // enumerate all settings of the untouched qubits
                std::uint64_t rest = 0;
                while (true) {
                    trips.emplace_back(static_cast<Index>(rest | scatter[a]),
                                       static_cast<Index>(rest | scatter[b]), v);
                    if (rest == rest_mask) break;
                    rest = (rest - rest_mask) & rest_mask;  // next subset of rest_mask
                }
            }
        }
    }

    SparseMatrix out(dim, dim);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

inline Matrix assemble_dense(const Hamiltonian& h, const Caps& caps = default_caps()) {
    if (h.n_qubits > 12) throw CapacityError("assemble_dense: use the sparse path above 12 qubits");
    return Matrix(assemble_sparse(h, caps));
}

// --------------------------- Pauli decomposition -----------------------------

// Pauli word on named qubits with a real coefficient; empty letters = identity.
struct PauliString {
    int n_qubits = 0;
    std::vector<std::pair<int, char>> letters;  // sorted by qubit index, no 'I'
    double coefficient = 0.0;
};

inline Matrix pauli_string_matrix_on_support(const std::vector<std::pair<int, char>>& letters,
                                             const std::vector<int>& support) {
    Matrix m(1, 1);
    m(0, 0) = 1.0;
    for (int q : support) {
        char p = 'I';
        for (const auto& [lq, lp] : letters)
            if (lq == q) p = lp;
        m = kron_lsb(m, pauli_letter(p));
    }
    return m;
}

// Decomposes t.weight * t.matrix into Pauli words on t.support.  Coefficients
// of a Hermitian input are real; the reassembled sum reproduces the matrix to
// 1e-12.
inline std::vector<PauliString> pauli_decompose(const InteractionTerm& t, int n_qubits,
                                                double drop_tol = 1e-14) {
    t.validate();
    const int k = t.locality();
    const Index dim = Index{1} << k;
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};

    std::vector<PauliString> out;
    std::vector<int> word(static_cast<std::size_t>(k), 0);
    const std::uint64_t n_words = std::uint64_t{1} << (2 * k);
    for (std::uint64_t w = 0; w < n_words; ++w) {
        std::uint64_t ww = w;
        for (int j = 0; j < k; ++j) {
            word[static_cast<std::size_t>(j)] = static_cast<int>(ww & 3u);
            ww >>= 2;
        }
        Matrix p(1, 1);
        p(0, 0) = 1.0;
        for (int j = 0; j < k; ++j) p = kron_lsb(p, pauli_letter(kLetters[word[static_cast<std::size_t>(j)]]));
        const Complex c = (p.adjoint() * (t.weight * t.matrix)).trace() / static_cast<double>(dim);
        if (std::abs(c.imag()) > 1e-10)
            throw ValidationError("pauli_decompose: non-real coefficient from non-Hermitian input");
        if (std::abs(c.real()) <= drop_tol) continue;
        PauliString ps;
        ps.n_qubits = n_qubits;
        ps.coefficient = c.real();
        for (int j = 0; j < k; ++j)
            if (word[static_cast<std::size_t>(j)] != 0)
                ps.letters.emplace_back(t.support[static_cast<std::size_t>(j)],
                                        kLetters[word[static_cast<std::size_t>(j)]]);
        std::sort(ps.letters.begin(), ps.letters.end());
        out.push_back(std::move(ps));
    }
    return out;
}

// Rebuilds the dense matrix of a list of Pauli strings on a given support.
inline Matrix pauli_reassemble(const std::vector<PauliString>& strings,
                               const std::vector<int>& support) {
    const Index dim = Index{1} << support.size();
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto& s : strings)
        m += s.coefficient * pauli_string_matrix_on_support(s.letters, support);
    return m;
}

// --------------------------- norms and normalization ------------------------

inline double term_spectral_norm(const InteractionTerm& t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.matrix, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// Triangle-inequality bound sum_i |w_i| * ||M_i||; always >= the true norm.
inline double operator_norm_bound(const Hamiltonian& h) {
    double bound = 0.0;
    for (const auto& t : h.terms) bound += std::abs(t.weight) * term_spectral_norm(t);
    return bound;
}

struct Normalized {
    Hamiltonian hamiltonian;
    double factor = 1.0;  // divide thresholds by this to stay consistent
};

inline Normalized normalize(const Hamiltonian& h) {
    h.validate();
    const double bound = operator_norm_bound(h);
    if (bound <= 0.0) throw ValidationError("normalize: zero Hamiltonian");
    Normalized out{h, bound};
    for (auto& t : out.hamiltonian.terms) t.weight /= bound;
    return out;
}

} // namespace glh::ham
