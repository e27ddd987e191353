// spectra.hpp — dense and iterative eigensolvers with residual guarantees,
// eigenlevel projectors and fidelities, and the guided low-energy decision
// oracle.

#pragma once

#include "glh/common.hpp"
#include "glh/guide_states.hpp"
#include "glh/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace glh::spectra {

// --------------------------- options / result --------------------------------

struct SolverOptions {
    enum class Method { automatic, dense, iterative };
    Method method = Method::automatic;
    double tol = 1e-10;
    int max_basis = 0;  // 0: chosen from the request size
    std::uint64_t seed = 12345;
    bool want_vectors = true;
    double cluster_tol = 1e-8;  // relative to the spectral scale
};

struct SpectralResult {
    std::vector<double> eigenvalues;  // non-decreasing
    Matrix eigenvectors;              // columns, aligned with eigenvalues (may be 0x0)
    std::vector<double> residuals;    // ||Hv - lambda v|| per returned pair
    std::string method;
    double norm_estimate = 0.0;
};

// --------------------------- dense path --------------------------------------

inline SpectralResult dense_spectrum(const Matrix& h, int k, bool want_vectors = true) {
    if (h.rows() != h.cols()) throw ValidationError("dense_spectrum: matrix must be square");
    const int dim = static_cast<int>(h.rows());
    k = std::min(k, dim);
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.compute(h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    SpectralResult out;
    out.method = "dense";
    const auto& ev = es.eigenvalues();
    out.norm_estimate = std::max(std::abs(ev(0)), std::abs(ev(dim - 1)));
    out.eigenvalues.assign(ev.data(), ev.data() + k);
    out.residuals.resize(static_cast<std::size_t>(k), 0.0);
    if (want_vectors) {
        out.eigenvectors = es.eigenvectors().leftCols(k);
        for (int i = 0; i < k; ++i) {
            out.residuals[static_cast<std::size_t>(i)] =
                (h * out.eigenvectors.col(i) - ev(i) * out.eigenvectors.col(i)).norm();
        }
    }
    return out;
}

// --------------------------- Lanczos (full reorthogonalization) --------------

namespace detail {

inline Vector seeded_start(Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    v.normalize();
    return v;
}

inline void orthogonalize_against(Vector& w, const std::vector<Vector>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : basis) w -= (v.adjoint() * w)(0, 0) * v;
}

struct TridiagEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline TridiagEig tridiag_eig(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    return {es.eigenvalues(), es.eigenvectors()};
}

} // namespace detail

// Lanczos with full reorthogonalization and a deterministic seeded start.
// Breakdowns restart with a fresh vector orthogonal to the current basis, so
// degenerate copies in exhausted invariant subspaces are still found.
template <class MatVec>
SpectralResult lanczos_lowest(const MatVec& apply, Index dim, int k,
                              const SolverOptions& opts = {}) {
    if (k < 1) throw ValidationError("lanczos_lowest: need k >= 1");
    k = std::min<int>(k, static_cast<int>(dim));
    const int max_basis =
        opts.max_basis > 0 ? std::min<Index>(opts.max_basis, dim)
                           : std::min<Index>(dim, std::max<Index>(4 * k + 80, 160));

    std::vector<Vector> basis;
    std::vector<double> alpha, beta;  // beta[i] couples basis[i] and basis[i+1]
    basis.reserve(static_cast<std::size_t>(max_basis));
    std::uint64_t draw = opts.seed;
    basis.push_back(detail::seeded_start(dim, draw++));

    detail::TridiagEig te;
    double norm_est = 1.0;
    double trailing_beta = 0.0;
    bool converged = false;
    bool exhausted = false;

    for (int j = 0; j < max_basis; ++j) {
        Vector w = apply(basis[static_cast<std::size_t>(j)]);
        const double a = (basis[static_cast<std::size_t>(j)].adjoint() * w)(0, 0).real();
        alpha.push_back(a);
        detail::orthogonalize_against(w, basis);
        const double b = w.norm();
        norm_est = std::max(norm_est, std::abs(a) + b);
        const bool breakdown = b <= 1e-13 * norm_est;
        const int m = static_cast<int>(alpha.size());

        if (m >= k && (m % std::max(8, k) == 0 || j + 1 == max_basis || breakdown)) {
            te = detail::tridiag_eig(alpha, beta);
            bool all_small = true;
            const double eff_b = breakdown ? 0.0 : b;
            for (int i = 0; i < k && all_small; ++i)
                all_small = std::abs(eff_b * te.vectors(m - 1, i)) <= opts.tol * norm_est;
            if (all_small) {
                converged = true;
                trailing_beta = eff_b;
                break;
            }
        }
        if (j + 1 == max_basis) {
            trailing_beta = breakdown ? 0.0 : b;
            break;
        }
        if (breakdown) {
            // invariant subspace hit; continue in the orthogonal complement
            Vector fresh = detail::seeded_start(dim, draw++);
            detail::orthogonalize_against(fresh, basis);
            const double fn = fresh.norm();
            if (fn <= 1e-10) {
                trailing_beta = 0.0;
                exhausted = true;
                break;
            }
            beta.push_back(0.0);
            basis.push_back(fresh / fn);
        } else {
            beta.push_back(b);
            basis.push_back(w / b);
        }
    }

    const int m = static_cast<int>(alpha.size());
    if (m < k) throw ConvergenceError("lanczos_lowest: basis exhausted before k pairs");
    if (te.values.size() != m) te = detail::tridiag_eig(alpha, beta);
    if (!converged && !exhausted) {
        for (int i = 0; i < k; ++i) {
            const double r = std::abs(trailing_beta * te.vectors(m - 1, i));
            if (r > opts.tol * norm_est)
                throw ConvergenceError("lanczos_lowest: not converged after " +
                                       std::to_string(m) + " steps; residual estimate " +
                                       std::to_string(r));
        }
    }

    SpectralResult out;
    out.method = "iterative";
    out.norm_estimate = norm_est;
    out.eigenvalues.assign(te.values.data(), te.values.data() + k);
    out.eigenvectors.resize(dim, k);
    for (int i = 0; i < k; ++i) {
        Vector x = Vector::Zero(dim);
        for (int j = 0; j < m; ++j) x += te.vectors(j, i) * basis[static_cast<std::size_t>(j)];
        x.normalize();
        out.eigenvectors.col(i) = x;
    }
    out.residuals.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double res = (apply(Vector(out.eigenvectors.col(i))) -
                            out.eigenvalues[static_cast<std::size_t>(i)] * out.eigenvectors.col(i))
                               .norm();
        out.residuals[static_cast<std::size_t>(i)] = res;
        if (res > 100 * opts.tol * norm_est)
            throw ConvergenceError("lanczos_lowest: Ritz pair residual " + std::to_string(res) +
                                   " exceeds the tolerance");
    }
    return out;
}

// One deflated verification round so degenerate bottom levels reached from a
// single start vector do not hide extra copies.
template <class MatVec>
SpectralResult lanczos_lowest_verified(const MatVec& apply, Index dim, int k,
                                       const SolverOptions& opts = {}) {
    SpectralResult first = lanczos_lowest(apply, dim, k, opts);
    if (static_cast<Index>(k) >= dim) return first;

    Matrix found = first.eigenvectors;
    auto deflated = [&](const Vector& v) {
        Vector u = v - found * (found.adjoint() * v);
        Vector out = apply(u);
        return Vector(out - found * (found.adjoint() * out));
    };
    SolverOptions o2 = opts;
    o2.seed = opts.seed + 101;
    const int extra = std::min<int>(k, static_cast<int>(dim - k));
    SpectralResult second;
    try {
        second = lanczos_lowest(deflated, dim, extra, o2);
    } catch (const ConvergenceError&) {
        return first;  // deflated operator can be rank-deficient; keep the verified set
    }

    // merge candidates below the current k-th value
    struct Pair {
        double val;
        Vector vec;
    };
    std::vector<Pair> all;
    for (int i = 0; i < k; ++i)
        all.push_back({first.eigenvalues[static_cast<std::size_t>(i)], first.eigenvectors.col(i)});
    const double cutoff = first.eigenvalues.back() + opts.tol * first.norm_estimate;
    for (int i = 0; i < extra; ++i) {
        Vector cand = second.eigenvectors.col(i);
        const Vector hv = apply(cand);
        const double rq = (cand.adjoint() * hv)(0, 0).real();
        const double res = (hv - rq * cand).norm();
        if (rq < cutoff && res <= 10 * opts.tol * first.norm_estimate) all.push_back({rq, cand});
    }
    std::stable_sort(all.begin(), all.end(), [](const Pair& a, const Pair& b) { return a.val < b.val; });

    SpectralResult out;
    out.method = first.method;
    out.norm_estimate = first.norm_estimate;
    out.eigenvectors.resize(dim, k);
    for (int i = 0; i < k; ++i) {
        out.eigenvalues.push_back(all[static_cast<std::size_t>(i)].val);
        out.eigenvectors.col(i) = all[static_cast<std::size_t>(i)].vec;
        out.residuals.push_back((apply(Vector(out.eigenvectors.col(i))) -
                                 out.eigenvalues.back() * out.eigenvectors.col(i))
                                    .norm());
    }
    return out;
}

// --------------------------- front door --------------------------------------

inline SpectralResult low_spectrum(const SparseMatrix& h, int k, const SolverOptions& opts = {},
                                   const Caps& caps = default_caps()) {
    if (h.rows() != h.cols()) throw ValidationError("low_spectrum: matrix must be square");
    const Index dim = h.rows();
    if (k < 1) throw ValidationError("low_spectrum: need k >= 1");
    k = std::min<int>(k, static_cast<int>(dim));

    const bool use_dense = opts.method == SolverOptions::Method::dense ||
                           (opts.method == SolverOptions::Method::automatic &&
                            dim <= caps.dense_dim_cap);
    if (use_dense) {
        if (dim > caps.dense_dim_cap && opts.method == SolverOptions::Method::dense)
            throw CapacityError("low_spectrum: dense backend capped at dim " +
                                std::to_string(caps.dense_dim_cap));
        auto out = dense_spectrum(Matrix(h), k, opts.want_vectors);
        return out;
    }
    if (static_cast<std::uint64_t>(dim) > caps.iterative_dim_cap)
        throw CapacityError("low_spectrum: dimension beyond the iterative cap");
    if (k > caps.max_requested_pairs)
        throw CapacityError("low_spectrum: too many pairs requested from the iterative backend");
    auto apply = [&h](const Vector& v) { return Vector(h * v); };
    return lanczos_lowest_verified(apply, dim, k, opts);
}

inline SpectralResult low_spectrum(const ham::Hamiltonian& h, int k, const SolverOptions& opts = {},
                                   const Caps& caps = default_caps()) {
    return low_spectrum(ham::assemble_sparse(h, caps), k, opts, caps);
}

// Interior eigenpairs near a shift, via Lanczos on the folded operator
// (H - sigma)^2; eigenvalues are recovered from Rayleigh quotients.
inline SpectralResult eigenpairs_near(const SparseMatrix& h, double sigma, int k,
                                      const SolverOptions& opts = {},
                                      const Caps& caps = default_caps()) {
    if (static_cast<std::uint64_t>(h.rows()) > caps.iterative_dim_cap)
        throw CapacityError("eigenpairs_near: dimension beyond the iterative cap");
    auto folded = [&](const Vector& v) {
        Vector w = h * v - sigma * v;
        return Vector(h * w - sigma * w);
    };
    SpectralResult inner = lanczos_lowest_verified(folded, h.rows(), k, opts);
    SpectralResult out;
    out.method = "iterative-folded";
    out.eigenvectors = inner.eigenvectors;
    for (int i = 0; i < static_cast<int>(inner.eigenvalues.size()); ++i) {
        const Vector v = inner.eigenvectors.col(i);
        const Vector hv = h * v;
        const double rq = (v.adjoint() * hv)(0, 0).real();
        out.eigenvalues.push_back(rq);
        out.residuals.push_back((hv - rq * v).norm());
        out.norm_estimate = std::max(out.norm_estimate, std::abs(rq));
    }
    // sort by eigenvalue for a non-decreasing result
    std::vector<int> order(out.eigenvalues.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return out.eigenvalues[static_cast<std::size_t>(a)] <
                                         out.eigenvalues[static_cast<std::size_t>(b)]; });
    SpectralResult sorted = out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.eigenvalues[i] = out.eigenvalues[static_cast<std::size_t>(order[i])];
        sorted.residuals[i] = out.residuals[static_cast<std::size_t>(order[i])];
        sorted.eigenvectors.col(static_cast<Index>(i)) =
            out.eigenvectors.col(order[static_cast<std::size_t>(i)]);
    }
    return sorted;
}

// --------------------------- levels and fidelity ------------------------------

struct LevelCluster {
    int lo = 0;
    int hi = 0;  // inclusive index range sharing the level's eigenvalue
    double value = 0.0;
};

// Eigenvalues within cluster_tol * scale of each other (chained) form one
// level.  Requires the cluster to be fully contained in the computed range.
inline LevelCluster find_level_cluster(const std::vector<double>& eigenvalues, int c, double tol,
                                       bool may_extend_past_end) {
    if (c < 0 || c >= static_cast<int>(eigenvalues.size()))
        throw ValidationError("level index outside the computed spectrum");
    LevelCluster cl;
    cl.lo = cl.hi = c;
    cl.value = eigenvalues[static_cast<std::size_t>(c)];
    while (cl.lo > 0 && eigenvalues[static_cast<std::size_t>(cl.lo)] -
                                eigenvalues[static_cast<std::size_t>(cl.lo - 1)] <=
                            tol)
        --cl.lo;
    while (cl.hi + 1 < static_cast<int>(eigenvalues.size()) &&
           eigenvalues[static_cast<std::size_t>(cl.hi + 1)] -
                   eigenvalues[static_cast<std::size_t>(cl.hi)] <=
               tol)
        ++cl.hi;
    if (may_extend_past_end && cl.hi + 1 == static_cast<int>(eigenvalues.size()))
        throw ConvergenceError("level cluster reaches the end of the computed window; "
                               "request more pairs");
    return cl;
}

inline Matrix level_projector(const SpectralResult& r, int c, double cluster_tol = 1e-8) {
    const double tol = cluster_tol * std::max(1.0, r.norm_estimate);
    auto cl = find_level_cluster(r.eigenvalues, c, tol, r.method != "dense");
    const Index dim = r.eigenvectors.rows();
    Matrix p = Matrix::Zero(dim, dim);
    for (int i = cl.lo; i <= cl.hi; ++i)
        p += r.eigenvectors.col(i) * r.eigenvectors.col(i).adjoint();
    return p;
}

// ||Pi_c |u>||^2 where Pi_c projects onto the eigenspace of the c-th smallest
// eigenvalue.
inline double fidelity_with_level(const SparseMatrix& h, const Vector& state, int c,
                                  const SolverOptions& opts = {},
                                  const Caps& caps = default_caps()) {
    if (state.size() != h.rows())
        throw ValidationError("fidelity_with_level: state dimension mismatch");
    const int want = std::min<Index>(h.rows(), c + 8);
    SolverOptions o = opts;
    o.want_vectors = true;
    SpectralResult r = low_spectrum(h, want, o, caps);
    const double tol = opts.cluster_tol * std::max(1.0, r.norm_estimate);
    auto cl = find_level_cluster(r.eigenvalues, c, tol, r.method != "dense");
    double fid = 0.0;
    for (int i = cl.lo; i <= cl.hi; ++i)
        fid += std::norm((r.eigenvectors.col(i).adjoint() * state)(0, 0));
    return fid;
}

inline double fidelity_with_level(const ham::Hamiltonian& h, const Vector& state, int c,
                                  const SolverOptions& opts = {},
                                  const Caps& caps = default_caps()) {
    return fidelity_with_level(ham::assemble_sparse(h, caps), state, c, opts, caps);
}

// --------------------------- GLHLE instances ----------------------------------

using GuideState = std::variant<guide::SubsetState, guide::EncodedState>;

inline int guide_qubits(const GuideState& g) {
    if (std::holds_alternative<guide::SubsetState>(g))
        return std::get<guide::SubsetState>(g).n_qubits;
    return std::get<guide::EncodedState>(g).total_qubits();
}

inline Vector guide_vector(const GuideState& g, const Caps& caps = default_caps()) {
    if (std::holds_alternative<guide::SubsetState>(g))
        return guide::to_statevector(std::get<guide::SubsetState>(g), caps);
    return guide::to_statevector(std::get<guide::EncodedState>(g), caps);
}

// Decision-problem instance: decide lambda_c(H) <= a vs >= b, promised the
// guide has fidelity >= delta_fid with the level-c eigenspace.
struct GLHLEInstance {
    ham::Hamiltonian hamiltonian;
    GuideState guide;
    long c = 0;
    double a = 0.0;
    double b = 0.0;
    double delta_fid = 0.5;
    double normalization_factor = 1.0;  // original = stored weights * factor

    void validate(const Caps& caps = default_caps()) const {
        hamiltonian.validate();
        if (ham::operator_norm_bound(hamiltonian) > 1.0 + 1e-9)
            throw ValidationError("instance norm bound exceeds 1; normalize first");
        if (guide_qubits(guide) != hamiltonian.n_qubits)
            throw ValidationError("guide qubit count must match the Hamiltonian");
        if (!(b > a)) throw ValidationError("thresholds need b > a");
        if (!(delta_fid > 0.0 && delta_fid < 1.0))
            throw ValidationError("fidelity promise must lie in (0, 1)");
        if (c < 0) throw ValidationError("level index must be >= 0");
        (void)caps;
    }
};

struct Decision {
    enum class Verdict { yes, no, promise_violated };
    Verdict verdict = Verdict::promise_violated;
    double lambda_c = 0.0;
    double fidelity = 0.0;
    double a = 0.0, b = 0.0, delta_fid = 0.0;
    long c = 0;
    std::string note;
};

inline const char* to_string(Decision::Verdict v) {
    switch (v) {
        case Decision::Verdict::yes: return "YES";
        case Decision::Verdict::no: return "NO";
        default: return "promise-violated";
    }
}

inline Decision decide(const GLHLEInstance& inst, const SolverOptions& opts = {},
                       const Caps& caps = default_caps()) {
    inst.validate(caps);
    SparseMatrix h = ham::assemble_sparse(inst.hamiltonian, caps);
    const int want = std::min<Index>(h.rows(), inst.c + 8);
    SolverOptions o = opts;
    o.want_vectors = true;
    SpectralResult r = low_spectrum(h, want, o, caps);
    const double tol = opts.cluster_tol * std::max(1.0, r.norm_estimate);
    auto cl = find_level_cluster(r.eigenvalues, static_cast<int>(inst.c), tol,
                                 r.method != "dense");
    Vector u = guide_vector(inst.guide, caps);
    double fid = 0.0;
    for (int i = cl.lo; i <= cl.hi; ++i)
        fid += std::norm((r.eigenvectors.col(i).adjoint() * u)(0, 0));

    Decision d;
    d.lambda_c = r.eigenvalues[static_cast<std::size_t>(inst.c)];
    d.fidelity = fid;
    d.a = inst.a;
    d.b = inst.b;
    d.delta_fid = inst.delta_fid;
    d.c = inst.c;
    if (fid < inst.delta_fid) {
        d.verdict = Decision::Verdict::promise_violated;
        d.note = "guide fidelity below the promised delta";
    } else if (d.lambda_c <= inst.a) {
        d.verdict = Decision::Verdict::yes;
    } else if (d.lambda_c >= inst.b) {
        d.verdict = Decision::Verdict::no;
    } else {
        d.verdict = Decision::Verdict::promise_violated;
        d.note = "lambda_c lies strictly between the thresholds";
    }
    return d;
}

} // namespace glh::spectra
