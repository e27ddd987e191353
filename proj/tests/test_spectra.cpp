#include <catch2/catch_amalgamated.hpp>

#include "glh/spectra.hpp"
#include "oracles.hpp"

#include <random>

using namespace glh;
using namespace glh::ham;
using namespace glh::spectra;

namespace {

Hamiltonian random_sparse_hamiltonian(int n, int n_terms, std::mt19937_64& rng) {
    Hamiltonian h(n);
    std::uniform_real_distribution<double> w(-1.5, 1.5);
    for (int i = 0; i < n_terms; ++i) {
        const int k = 1 + static_cast<int>(rng() % 2);
        std::vector<int> qubits(static_cast<std::size_t>(n));
        std::iota(qubits.begin(), qubits.end(), 0);
        std::shuffle(qubits.begin(), qubits.end(), rng);
        qubits.resize(static_cast<std::size_t>(k));
        h.add(InteractionTerm(qubits, oracle::random_hermitian(Index{1} << k, rng), w(rng)));
    }
    return h;
}

SolverOptions iterative_opts() {
    SolverOptions o;
    o.method = SolverOptions::Method::iterative;
    return o;
}

} // namespace

TEST_CASE("dense low spectrum basics", "[spectra]") {
    Hamiltonian z(1);
    z.add(pauli_term({0}, "Z"));
    auto r = low_spectrum(z, 2);
    CHECK(r.eigenvalues[0] == Catch::Approx(-1.0));
    CHECK(r.eigenvalues[1] == Catch::Approx(1.0));

    Hamiltonian xy(2);
    xy.add(pauli_term({0, 1}, "XX"));
    xy.add(pauli_term({0, 1}, "YY"));
    auto r2 = low_spectrum(xy, 4);
    CHECK(r2.eigenvalues[0] == Catch::Approx(-2.0).margin(1e-12));
    CHECK(r2.eigenvalues[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(r2.eigenvalues[2] == Catch::Approx(0.0).margin(1e-12));
    CHECK(r2.eigenvalues[3] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("iterative agrees with dense", "[spectra]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);  // 2..6 qubits
        auto h = random_sparse_hamiltonian(n, 4, rng);
        auto sp = assemble_sparse(h);
        const int dim = static_cast<int>(sp.rows());
        const int k = (dim <= 64) ? dim : 12;

        auto dense = low_spectrum(sp, k, SolverOptions{});
        auto iter = low_spectrum(sp, k, iterative_opts());
        REQUIRE(iter.method != "dense");
        for (int i = 0; i < k; ++i) {
            CHECK(iter.eigenvalues[static_cast<std::size_t>(i)] ==
                  Catch::Approx(dense.eigenvalues[static_cast<std::size_t>(i)]).margin(1e-8));
        }
    }
}

TEST_CASE("larger iterative run with partial window", "[spectra]") {
    std::mt19937_64 rng(99);
    auto h = random_sparse_hamiltonian(10, 6, rng);  // dim 1024
    auto sp = assemble_sparse(h);
    auto dense = dense_spectrum(Matrix(sp), 10, false);
    auto iter = low_spectrum(sp, 10, iterative_opts());
    for (int i = 0; i < 10; ++i)
        CHECK(iter.eigenvalues[static_cast<std::size_t>(i)] ==
              Catch::Approx(dense.eigenvalues[static_cast<std::size_t>(i)]).margin(1e-8));
}

TEST_CASE("residual guarantee", "[spectra]") {
    std::mt19937_64 rng(3);
    auto h = random_sparse_hamiltonian(6, 5, rng);
    auto sp = assemble_sparse(h);
    for (const auto& opts : {SolverOptions{}, iterative_opts()}) {
        auto r = low_spectrum(sp, 6, opts);
        const double scale = std::max(1.0, r.norm_estimate);
        for (double res : r.residuals) CHECK(res <= 1e-9 * scale);
        for (std::size_t i = 1; i < r.eigenvalues.size(); ++i)
            CHECK(r.eigenvalues[i] >= r.eigenvalues[i - 1] - 1e-12);
    }
}

TEST_CASE("degenerate bottom levels are found by the iterative backend", "[spectra]") {
    // ZZ on a pair inside a larger register: the ground level is 2^(n-2)-fold
    Hamiltonian h(7);
    h.add(pauli_term({0, 1}, "ZZ"));
    auto sp = assemble_sparse(h);
    auto iter = low_spectrum(sp, 4, iterative_opts());
    for (int i = 0; i < 4; ++i)
        CHECK(iter.eigenvalues[static_cast<std::size_t>(i)] == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("convergence failure is an explicit error", "[spectra]") {
    std::mt19937_64 rng(5);
    auto h = random_sparse_hamiltonian(8, 6, rng);
    auto sp = assemble_sparse(h);
    SolverOptions o = iterative_opts();
    o.max_basis = 4;
    CHECK_THROWS_AS(low_spectrum(sp, 4, o), ConvergenceError);
}

TEST_CASE("interior eigenvalues via the folded operator", "[spectra]") {
    std::mt19937_64 rng(31);
    auto h = random_sparse_hamiltonian(6, 5, rng);
    auto sp = assemble_sparse(h);
    auto dense = dense_spectrum(Matrix(sp), 64, false);
    const double sigma =
        0.5 * (dense.eigenvalues[20] + dense.eigenvalues[21]);  // interior shift
    auto near = eigenpairs_near(sp, sigma, 4, iterative_opts());
    // every reported pair is a true eigenpair (tiny residual) near the shift
    for (std::size_t i = 0; i < near.eigenvalues.size(); ++i)
        CHECK(near.residuals[i] <= 1e-7 * std::max(1.0, dense.norm_estimate));
    double best = 1e9;
    for (double ev : dense.eigenvalues) best = std::min(best, std::abs(ev - sigma));
    double got = 1e9;
    for (double ev : near.eigenvalues) got = std::min(got, std::abs(ev - sigma));
    CHECK(got == Catch::Approx(best).margin(1e-7));
}

TEST_CASE("capacity checks", "[spectra]") {
    Caps caps;
    caps.dense_dim_cap = 8;
    Hamiltonian h(5);
    h.add(pauli_term({0, 1}, "ZZ"));
    SolverOptions dense_only;
    dense_only.method = SolverOptions::Method::dense;
    CHECK_THROWS_AS(low_spectrum(assemble_sparse(h), 2, dense_only, caps), CapacityError);
    caps.max_requested_pairs = 2;
    CHECK_THROWS_AS(low_spectrum(assemble_sparse(h), 4, iterative_opts(), caps), CapacityError);
}

TEST_CASE("level projector is idempotent and Hermitian", "[spectra]") {
    std::mt19937_64 rng(17);
    auto h = random_sparse_hamiltonian(4, 4, rng);
    auto r = low_spectrum(assemble_sparse(h), 6, SolverOptions{});
    Matrix p = level_projector(r, 2);
    CHECK((p - Matrix(p.adjoint())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fidelity with a level", "[spectra]") {
    SECTION("Z ground state is |1>") {
        Hamiltonian z(1);
        z.add(pauli_term({0}, "Z"));
        Vector one = Vector::Zero(2);
        one(1) = 1.0;
        CHECK(fidelity_with_level(z, one, 0) == Catch::Approx(1.0));
        CHECK(fidelity_with_level(z, one, 1) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("degenerate cluster uses the whole eigenspace") {
        Hamiltonian zz(2);
        zz.add(pauli_term({0, 1}, "ZZ"));
        Vector v = Vector::Zero(4);
        v(0b01) = 1.0;
        CHECK(fidelity_with_level(zz, v, 0) == Catch::Approx(1.0));
        CHECK(fidelity_with_level(zz, v, 1) == Catch::Approx(1.0));  // same cluster
    }
}

TEST_CASE("decide verdicts", "[spectra]") {
    auto make_inst = [](double weight, double a, double b, double delta) {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z", weight));
        GLHLEInstance inst;
        inst.hamiltonian = h;
        inst.guide = guide::SubsetState(1, {0b1});  // the Z ground state
        inst.a = a;
        inst.b = b;
        inst.delta_fid = delta;
        return inst;
    };

    SECTION("YES and NO") {
        auto yes = make_inst(1.0, -0.5, 0.5, 0.9);
        CHECK(decide(yes).verdict == Decision::Verdict::yes);
        auto no = make_inst(0.1, -0.5, -0.2, 0.9);  // lambda_0 = -0.1 >= b
        CHECK(decide(no).verdict == Decision::Verdict::no);
    }
    SECTION("gap case and fidelity violation") {
        auto gap = make_inst(0.1, -0.5, 0.5, 0.9);  // -0.1 strictly inside
        CHECK(decide(gap).verdict == Decision::Verdict::promise_violated);
        auto bad = make_inst(1.0, -0.5, 0.5, 0.9);
        bad.guide = guide::SubsetState(1, {0b0});  // orthogonal to the ground state
        auto d = decide(bad);
        CHECK(d.verdict == Decision::Verdict::promise_violated);
        CHECK(d.fidelity == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("widening thresholds never flips YES <-> NO") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            auto h = random_sparse_hamiltonian(2, 3, rng);
            auto n = normalize(h);
            GLHLEInstance inst;
            inst.hamiltonian = n.hamiltonian;
            inst.guide = guide::SubsetState(2, {0, 1, 2, 3});
            inst.delta_fid = 1e-6;
            std::uniform_real_distribution<double> t(-1.0, 1.0);
            double a = t(rng), b = t(rng);
            if (a > b) std::swap(a, b);
            if (a == b) b += 0.1;
            inst.a = a;
            inst.b = b;
            auto d0 = decide(inst);
            inst.a = a - 0.05;  // decreasing a
            inst.b = b + 0.05;  // increasing b
            auto d1 = decide(inst);
            if (d0.verdict == Decision::Verdict::yes)
                CHECK(d1.verdict != Decision::Verdict::no);
            if (d0.verdict == Decision::Verdict::no)
                CHECK(d1.verdict != Decision::Verdict::yes);
        }
    }
    SECTION("instance validation") {
        auto inst = make_inst(2.0, -0.5, 0.5, 0.9);  // norm bound 2 > 1
        CHECK_THROWS_AS(inst.validate(), ValidationError);
        auto inst2 = make_inst(1.0, 0.5, -0.5, 0.9);  // b < a
        CHECK_THROWS_AS(inst2.validate(), ValidationError);
        auto inst3 = make_inst(1.0, -0.5, 0.5, 0.9);
        inst3.guide = guide::SubsetState(2, {0});  // wrong register size
        CHECK_THROWS_AS(inst3.validate(), ValidationError);
    }
}
