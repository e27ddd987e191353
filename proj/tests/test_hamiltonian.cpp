#include <catch2/catch_amalgamated.hpp>

#include "glh/hamiltonian.hpp"
#include "oracles.hpp"

#include <random>

using namespace glh;
using namespace glh::ham;

namespace {

Hamiltonian random_hamiltonian(int n, int n_terms, std::mt19937_64& rng) {
    Hamiltonian h(n);
    std::uniform_int_distribution<int> loc(1, std::min(3, n));
    std::uniform_real_distribution<double> w(-2.0, 2.0);
    for (int i = 0; i < n_terms; ++i) {
        const int k = loc(rng);
        std::vector<int> qubits(static_cast<std::size_t>(n));
        std::iota(qubits.begin(), qubits.end(), 0);
        std::shuffle(qubits.begin(), qubits.end(), rng);
        qubits.resize(static_cast<std::size_t>(k));
        h.add(InteractionTerm(qubits, oracle::random_hermitian(Index{1} << k, rng), w(rng)));
    }
    return h;
}

} // namespace

TEST_CASE("interaction term validation", "[hamcore]") {
    Matrix not_herm(2, 2);
    not_herm << 0, 1,
                0, 0;
    CHECK_THROWS_AS(InteractionTerm({0}, not_herm), ValidationError);
    CHECK_THROWS_AS(InteractionTerm({0, 0}, Matrix::Identity(4, 4)), ValidationError);
    CHECK_THROWS_AS(InteractionTerm({0}, Matrix::Identity(4, 4)), ValidationError);
    CHECK_THROWS_AS(InteractionTerm({0, 1, 2, 3, 4, 5, 6}, Matrix::Identity(128, 128)),
                    ValidationError);

    Hamiltonian h(1);
    h.add(pauli_term({0}, "Z"));
    h.positive_weights_only = true;
    CHECK_NOTHROW(h.validate());
    h.terms[0].weight = -1.0;
    CHECK_THROWS_AS(h.validate(), ValidationError);

    Hamiltonian out_of_range(1);
    out_of_range.add(pauli_term({1}, "Z"));
    CHECK_THROWS_AS(out_of_range.validate(), ValidationError);
}

TEST_CASE("assemble_sparse basics", "[hamcore]") {
    SECTION("single Z on one qubit") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z"));
        Matrix m(assemble_sparse(h));
        CHECK(std::abs(m(0, 0) - Complex(1, 0)) < 1e-15);
        CHECK(std::abs(m(1, 1) - Complex(-1, 0)) < 1e-15);
        CHECK(std::abs(m(0, 1)) < 1e-15);
    }
    SECTION("empty term list is the zero matrix") {
        Hamiltonian h(2);
        Matrix m(assemble_sparse(h));
        CHECK(m.rows() == 4);
        CHECK(m.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("XX+YY eigenvalues from the dense oracle") {
        Hamiltonian h(2);
        h.add(pauli_term({0, 1}, "XX"));
        h.add(pauli_term({0, 1}, "YY"));
        auto ev = oracle::eigenvalues(Matrix(assemble_sparse(h)));
        CHECK(ev(0) == Catch::Approx(-2.0).margin(1e-12));
        CHECK(ev(1) == Catch::Approx(0.0).margin(1e-12));
        CHECK(ev(2) == Catch::Approx(0.0).margin(1e-12));
        CHECK(ev(3) == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("locality is reported") {
        Hamiltonian h(3);
        h.add(pauli_term({0}, "X"));
        h.add(pauli_term({0, 2}, "ZZ", 0.5));
        CHECK(h.locality() == 2);
    }
}

TEST_CASE("assemble matches the naive embedding oracle", "[hamcore]") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);  // 2..5
        auto h = random_hamiltonian(n, 3, rng);
        Matrix lib(assemble_sparse(h));
        Matrix ref = Matrix::Zero(lib.rows(), lib.cols());
        for (const auto& t : h.terms) ref += t.weight * oracle::embed(t.matrix, t.support, n);
        CHECK((lib - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("assembled operators are Hermitian", "[hamcore]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);  // 2..8
        auto h = random_hamiltonian(n, 4, rng);
        Matrix m(assemble_sparse(h));
        CHECK((m - Matrix(m.adjoint())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("assembly capacity errors", "[hamcore]") {
    Caps tight;
    tight.assembly_nonzero_budget = 8;
    Hamiltonian h(4);
    h.add(pauli_term({0, 1}, "XX"));
    CHECK_THROWS_AS(assemble_sparse(h, tight), CapacityError);
}

TEST_CASE("pauli_decompose identities", "[hamcore]") {
    SECTION("|0><0| = I/2 + Z/2") {
        InteractionTerm t({0}, ket_bra(0));
        auto strings = pauli_decompose(t, 1);
        REQUIRE(strings.size() == 2);
        for (const auto& s : strings) {
            if (s.letters.empty()) CHECK(s.coefficient == Catch::Approx(0.5));
            else {
                CHECK(s.letters == std::vector<std::pair<int, char>>{{0, 'Z'}});
                CHECK(s.coefficient == Catch::Approx(0.5));
            }
        }
    }
    SECTION("singlet projector = (II - XX - YY - ZZ)/4") {
        Vector singlet(4);
        singlet << 0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0;
        InteractionTerm t({0, 1}, singlet * singlet.adjoint());
        auto strings = pauli_decompose(t, 2);
        REQUIRE(strings.size() == 4);
        for (const auto& s : strings) {
            const double expect = s.letters.empty() ? 0.25 : -0.25;
            CHECK(s.coefficient == Catch::Approx(expect).margin(1e-12));
            if (!s.letters.empty()) {
                REQUIRE(s.letters.size() == 2);
                CHECK(s.letters[0].second == s.letters[1].second);
            }
        }
    }
    SECTION("random Hermitian reassembles") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            InteractionTerm t({0, 1}, oracle::random_hermitian(4, rng), 1.0);
            auto strings = pauli_decompose(t, 2);
            Matrix back = pauli_reassemble(strings, t.support);
            CHECK((back - t.matrix).cwiseAbs().maxCoeff() < 1e-12);
            for (const auto& s : strings) CHECK(std::isfinite(s.coefficient));
        }
    }
    SECTION("non-Hermitian input is rejected by the term constructor") {
        Matrix bad(2, 2);
        bad << 0, 2,
               0, 0;
        CHECK_THROWS_AS(InteractionTerm({0}, bad), ValidationError);
    }
}

TEST_CASE("operator norm bound", "[hamcore]") {
    SECTION("single Pauli with weight 3") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z", 3.0));
        CHECK(operator_norm_bound(h) == Catch::Approx(3.0));
    }
    SECTION("two Z terms on the same qubit: bound 2 equals true norm") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z"));
        h.add(pauli_term({0}, "Z"));
        CHECK(operator_norm_bound(h) == Catch::Approx(2.0));
        CHECK(oracle::spectral_norm(Matrix(assemble_sparse(h))) == Catch::Approx(2.0));
    }
    SECTION("X and Z on one qubit: bound 2 exceeds true norm sqrt(2)") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "X"));
        h.add(pauli_term({0}, "Z"));
        CHECK(operator_norm_bound(h) == Catch::Approx(2.0));
        CHECK(oracle::spectral_norm(Matrix(assemble_sparse(h))) ==
              Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    }
    SECTION("XX and ZZ on one pair: bound 2, true norm 2 (they commute)") {
        Hamiltonian h(2);
        h.add(pauli_term({0, 1}, "XX"));
        h.add(pauli_term({0, 1}, "ZZ"));
        CHECK(operator_norm_bound(h) == Catch::Approx(2.0));
        CHECK(oracle::spectral_norm(Matrix(assemble_sparse(h))) == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("bound dominates max |eig| on random instances") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 30; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 7);  // up to 8
            auto h = random_hamiltonian(n, 4, rng);
            const double bound = operator_norm_bound(h);
            const double truth = oracle::spectral_norm(Matrix(assemble_sparse(h)));
            CHECK(bound >= truth - 1e-10);
        }
    }
}

TEST_CASE("normalize", "[hamcore]") {
    SECTION("Z with weight 4") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z", 4.0));
        auto n = normalize(h);
        CHECK(n.factor == Catch::Approx(4.0));
        CHECK(n.hamiltonian.terms[0].weight == Catch::Approx(1.0));
    }
    SECTION("already-normalized input has factor ~ 1") {
        Hamiltonian h(1);
        h.add(pauli_term({0}, "Z", 1.0));
        auto n = normalize(h);
        CHECK(n.factor == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(n.hamiltonian.terms[0].weight == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("zero Hamiltonian is rejected") {
        Hamiltonian h(2);
        CHECK_THROWS_AS(normalize(h), ValidationError);
        h.add(pauli_term({0}, "Z", 0.0));
        CHECK_THROWS_AS(normalize(h), ValidationError);
    }
    SECTION("eigenvalues scale by exactly the recorded factor") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            auto h = random_hamiltonian(3, 4, rng);
            if (operator_norm_bound(h) <= 0) continue;
            auto n = normalize(h);
            auto ev0 = oracle::eigenvalues(Matrix(assemble_sparse(h)));
            auto ev1 = oracle::eigenvalues(Matrix(assemble_sparse(n.hamiltonian)));
            for (Index i = 0; i < ev0.size(); ++i)
                CHECK(ev1(i) == Catch::Approx(ev0(i) / n.factor).margin(1e-10));
        }
    }
}
