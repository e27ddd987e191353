#include <catch2/catch_amalgamated.hpp>

#include "glh/excited.hpp"
#include "oracles.hpp"

#include <random>

using namespace glh;
using namespace glh::excited;

namespace {

// Random Hamiltonian with nonnegative spectrum and norm of order one, the
// shape the clock pipeline feeds into the lift.
ham::Hamiltonian random_psd_hamiltonian(int n, std::mt19937_64& rng) {
    const Index dim = Index{1} << n;
    Matrix a = oracle::random_hermitian(dim, rng);
    Matrix psd = a * a;
    psd /= oracle::spectral_norm(psd);
    std::uniform_real_distribution<double> scale(0.3, 1.0);
    psd *= scale(rng);
    std::vector<int> support(static_cast<std::size_t>(n));
    std::iota(support.begin(), support.end(), 0);
    ham::Hamiltonian h(n);
    h.add(ham::InteractionTerm(support, psd));
    return h;
}

spectra::GLHLEInstance ground_instance(const ham::Hamiltonian& h, std::mt19937_64& rng) {
    spectra::GLHLEInstance inst;
    inst.hamiltonian = ham::normalize(h).hamiltonian;
    std::vector<std::uint64_t> strings;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << h.n_qubits); ++x)
        if (rng() % 2) strings.push_back(x);
    if (strings.empty()) strings.push_back(0);
    inst.guide = guide::SubsetState(h.n_qubits, strings);
    inst.a = 0.2;
    inst.b = 0.4;
    inst.delta_fid = 1e-9;
    return inst;
}

std::vector<double> diag_eigenvalues(const ham::Hamiltonian& h) {
    const Eigen::VectorXd ev = oracle::eigenvalues(ham::assemble_dense(h));
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

} // namespace

TEST_CASE("ladder spectrum", "[excited]") {
    SECTION("c=1 on three qubits: one -1/2, the rest at least +1/2") {
        auto ev = diag_eigenvalues(build_ladder(2, 1));
        CHECK(ev.front() == Catch::Approx(-0.5));
        int negatives = 0;
        for (double v : ev)
            if (v < 0) ++negatives;
        CHECK(negatives == 1);
        CHECK(ev[1] >= 0.5 - 1e-12);
    }
    SECTION("c=3 on four qubits: bottom three are -5/2, -3/2, -1/2") {
        auto ev = diag_eigenvalues(build_ladder(3, 3));
        CHECK(ev[0] == Catch::Approx(-2.5));
        CHECK(ev[1] == Catch::Approx(-1.5));
        CHECK(ev[2] == Catch::Approx(-0.5));
        CHECK(ev[3] == Catch::Approx(0.5));
    }
    SECTION("c=4 with highest index 4: largest eigenvalue 19.5") {
        auto ev = diag_eigenvalues(build_ladder(4, 4));
        CHECK(ev.back() == Catch::Approx(19.5));
        CHECK(ev.front() == Catch::Approx(-3.5));
        int negatives = 0;
        for (double v : ev)
            if (v < 0) ++negatives;
        CHECK(negatives == 4);
        // largest negative / smallest non-negative straddle at +-1/2
        double largest_neg = -1e9, smallest_nonneg = 1e9;
        for (double v : ev) {
            if (v < 0) largest_neg = std::max(largest_neg, v);
            else smallest_nonneg = std::min(smallest_nonneg, v);
        }
        CHECK(largest_neg == Catch::Approx(-0.5));
        CHECK(smallest_nonneg == Catch::Approx(0.5));
    }
    SECTION("range checks") {
        CHECK_THROWS_AS(build_ladder(2, 0), ValidationError);
        CHECK_THROWS_AS(build_ladder(2, 5), ValidationError);  // ceil(log2 5) = 3 > 2
        CHECK_NOTHROW(build_ladder(2, 4));
        CHECK_NOTHROW(build_ladder(0, 1));
    }
}

TEST_CASE("rescaled base affine map", "[excited]") {
    SECTION("scalar arithmetic of the map at norm 1") {
        ham::Hamiltonian z(1);
        z.add(ham::pauli_term({0}, "Z"));
        auto rb = build_rescaled_base(z);
        CHECK(rb.norm_used == Catch::Approx(1.0));
        // lambda = -1 lands at 0.5 * (-0.75 / 1.25) - 0.25 = -0.55, outside [-1/4, 1/4]
        CHECK(rb.map(-1.0) == Catch::Approx(-0.55));
        CHECK(rb.map(1.0) == Catch::Approx(0.25));
        auto ev = diag_eigenvalues(rb.hamiltonian);
        CHECK(ev.front() == Catch::Approx(-0.55));
        CHECK(ev.back() == Catch::Approx(0.25));
    }
    SECTION("spectrum {-1/4, +1/4} maps onto the endpoints exactly") {
        ham::Hamiltonian x(1);
        x.add(ham::pauli_term({0}, "X", 0.25));
        auto rb = build_rescaled_base(x);
        CHECK(rb.map(-0.25) == Catch::Approx(-0.25));
        CHECK(rb.map(0.25) == Catch::Approx(0.25));
    }
    SECTION("term bound fallback uses the looser norm") {
        ham::Hamiltonian h(1);
        h.add(ham::pauli_term({0}, "X", 0.5));
        h.add(ham::pauli_term({0}, "Z", 0.5));
        auto loose = build_rescaled_base(h, NormMode::term_bound);
        auto tight = build_rescaled_base(h, NormMode::true_norm);
        CHECK(loose.norm_used == Catch::Approx(1.0));
        CHECK(tight.norm_used == Catch::Approx(std::sqrt(0.5)).margin(1e-10));
        CHECK(loose.map.scale < tight.map.scale);
    }
    SECTION("eigenvector order is preserved") {
        std::mt19937_64 rng(7);
        auto h = random_psd_hamiltonian(2, rng);
        auto rb = build_rescaled_base(h);
        auto base_ev = diag_eigenvalues(h);
        auto ev = diag_eigenvalues(rb.hamiltonian);
        for (std::size_t i = 0; i < ev.size(); ++i)
            CHECK(ev[i] == Catch::Approx(rb.map(base_ev[i])).margin(1e-10));
    }
}

TEST_CASE("combined gadget spectrum merges ladder and rescaled base", "[excited]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);  // 2..3
        const long c_max = std::min<long>(5, (long{1} << n) - 1);
        const long c = 1 + static_cast<long>(rng() % c_max);
        auto h = random_psd_hamiltonian(n, rng);
        auto g = build_excited_gadget(h, c);

        auto combined_ev = diag_eigenvalues(g.combined);
        auto hz_ev = diag_eigenvalues(g.hz);
        std::vector<double> hs_ev = diag_eigenvalues(g.hs);
        // pad the rescaled-base branch when the ladder needed extra qubits
        std::vector<double> merged = hz_ev;
        const int copies = 1 << (g.branch_qubits - n);
        for (double v : hs_ev)
            for (int r = 0; r < copies; ++r) merged.push_back(v);
        std::sort(merged.begin(), merged.end());
        REQUIRE(merged.size() == combined_ev.size());
        for (std::size_t i = 0; i < merged.size(); ++i)
            CHECK(combined_ev[i] == Catch::Approx(merged[i]).margin(1e-10));

        // position of lambda_0(hs) in the merged order is exactly c
        const double target = *std::min_element(hs_ev.begin(), hs_ev.end());
        CHECK(combined_ev[static_cast<std::size_t>(c)] == Catch::Approx(target).margin(1e-10));
        CHECK(combined_ev[static_cast<std::size_t>(c)] -
                  combined_ev[static_cast<std::size_t>(c - 1)] >=
              0.25 - 1e-10);
    }
}

TEST_CASE("lift_instance", "[excited]") {
    std::mt19937_64 rng(13);

    SECTION("c = 0 returns the input unchanged") {
        auto h = random_psd_hamiltonian(2, rng);
        auto inst = ground_instance(h, rng);
        auto lifted = lift_instance(inst, 0);
        CHECK(lifted.instance.hamiltonian.n_qubits == inst.hamiltonian.n_qubits);
        CHECK(lifted.instance.c == 0);
    }
    SECTION("subset guide gains the fixed selector bit") {
        auto h = random_psd_hamiltonian(2, rng);
        auto inst = ground_instance(h, rng);
        auto lifted = lift_instance(inst, 2);
        const auto& guide0 = std::get<guide::SubsetState>(inst.guide);
        const auto& guide1 = std::get<guide::SubsetState>(lifted.instance.guide);
        CHECK(guide1.size() == guide0.size());
        CHECK(guide1.n_qubits == lifted.instance.hamiltonian.n_qubits);
        for (std::size_t i = 0; i < guide0.subset.size(); ++i)
            CHECK(guide1.subset[i] ==
                  (guide0.subset[i] |
                   (std::uint64_t{1} << (lifted.instance.hamiltonian.n_qubits - 1))));
    }
    SECTION("lambda_c of the lifted instance is the affine image of lambda_0") {
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 2);
            const long c_max = std::min<long>(5, (long{1} << n) - 1);
            const long c = 1 + static_cast<long>(rng() % c_max);
            auto h = random_psd_hamiltonian(n, rng);
            auto inst = ground_instance(h, rng);
            auto lifted = lift_instance(inst, c);
            auto ev = diag_eigenvalues(lifted.instance.hamiltonian);
            const double lambda0 = diag_eigenvalues(inst.hamiltonian).front();
            const double expect = lifted.gadget.map(lambda0) / lifted.normalization_factor;
            CHECK(ev[static_cast<std::size_t>(c)] == Catch::Approx(expect).margin(1e-10));
        }
    }
    SECTION("fidelity at level c equals the base fidelity at level 0") {
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 2;
            const long c = 1 + static_cast<long>(rng() % 3);
            auto h = random_psd_hamiltonian(n, rng);
            auto inst = ground_instance(h, rng);
            auto lifted = lift_instance(inst, c);
            const double base_fid = spectra::fidelity_with_level(
                ham::assemble_sparse(inst.hamiltonian), spectra::guide_vector(inst.guide), 0);
            const double lifted_fid = spectra::fidelity_with_level(
                ham::assemble_sparse(lifted.instance.hamiltonian),
                spectra::guide_vector(lifted.instance.guide), static_cast<int>(c));
            CHECK(lifted_fid == Catch::Approx(base_fid).margin(1e-10));
        }
    }
    SECTION("out-of-range c is rejected") {
        auto h = random_psd_hamiltonian(2, rng);
        auto inst = ground_instance(h, rng);
        CHECK_THROWS_AS(lift_instance(inst, 4), ValidationError);  // 2^2 - 1 = 3
        CHECK_THROWS_AS(lift_instance(inst, -1), ValidationError);
    }
    SECTION("spectra below -1/4 are rejected") {
        ham::Hamiltonian z(2);
        z.add(ham::pauli_term({0}, "Z", 0.9));
        spectra::GLHLEInstance inst;
        inst.hamiltonian = z;
        inst.guide = guide::SubsetState(2, {0, 1});
        inst.a = -0.5;
        inst.b = 0.5;
        inst.delta_fid = 0.1;
        CHECK_THROWS_AS(lift_instance(inst, 1), ValidationError);
    }
}
