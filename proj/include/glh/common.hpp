// common.hpp — shared aliases, error types, resource caps, bit helpers

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace glh {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

// Hermiticity / unitarity checks are exact constructions assembled in double
// precision, so a fixed absolute tolerance is used project-wide.
inline constexpr double kHermitianTol = 1e-12;

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resource caps. GLH_DIM_CAP overrides the sparse-assembly nonzero budget.
struct Caps {
    std::uint64_t assembly_nonzero_budget = std::uint64_t{1} << 24;
    int simulate_max_qubits = 20;
    Index dense_dim_cap = 4096;
    int max_requested_pairs = 200;
    std::uint64_t iterative_dim_cap = std::uint64_t{1} << 22;
    std::uint64_t subset_size_cap = 1'000'000;

    static Caps from_env() {
        Caps c;
        if (const char* s = std::getenv("GLH_DIM_CAP")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(s, &end, 10);
            if (end && *end == '\0' && v > 0) {
                c.assembly_nonzero_budget = v;
            }
        }
        return c;
    }
};

inline const Caps& default_caps() {
    static const Caps caps = Caps::from_env();
    return caps;
}

// --------------------------- bit helpers ------------------------------------
// Qubit 0 is the least significant bit of a computational-basis index.

inline int get_bit(std::uint64_t x, int i) noexcept {
    return static_cast<int>((x >> i) & 1u);
}

inline std::uint64_t set_bit(std::uint64_t x, int i, int b) noexcept {
    return b ? (x | (std::uint64_t{1} << i)) : (x & ~(std::uint64_t{1} << i));
}

inline std::string to_bit_string(std::uint64_t x, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = get_bit(x, i) ? '1' : '0';
    return s;
}

// Parses "0101..." with character i giving the bit of qubit i.
inline std::uint64_t from_bit_string(const std::string& s) {
    if (s.size() > 64) throw ValidationError("bit string longer than 64 qubits");
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1') x |= std::uint64_t{1} << i;
        else if (s[i] != '0') throw ValidationError("bit string must contain only 0/1");
    }
    return x;
}

} // namespace glh
