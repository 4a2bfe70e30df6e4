// random.hpp: seeded generators for random states and operators
//
// Generator: std::mt19937_64 (its output sequence is fixed by the standard).
// Uniforms take the top 53 bits; normals use the Box-Muller transform, so a
// given seed produces the same matrices on every platform.

#pragma once

#include <cstdint>
#include <random>

#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"

namespace qdyn {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    Complex complex_normal() { return {normal(), normal()}; }
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// GUE-style (A + A^dagger)/2 with independent standard-normal real and
/// imaginary parts in A.
ComplexMatrix random_hermitian(std::size_t dim, Rng& rng);
/// (A + A^T)/2 with real standard-normal A.
ComplexMatrix random_real_symmetric(std::size_t dim, Rng& rng);
/// Complex matrix with independent standard-normal parts.
ComplexMatrix random_complex(std::size_t dim, Rng& rng);
/// Uniformly distributed pure state.
PureState random_pure_state(std::size_t dim, Rng& rng);
/// G G^dagger / tr(G G^dagger) for complex Gaussian G; full rank almost surely.
DensityMatrix random_density(std::size_t dim, Rng& rng);

}  // namespace qdyn
