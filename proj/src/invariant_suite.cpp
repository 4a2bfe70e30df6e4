#include "qdyn/invariant_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string_view>

#include "qdyn/dynamics.hpp"
#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"
#include "qdyn/random.hpp"
#include "qdyn/systems.hpp"

namespace qdyn {

namespace {

constexpr int kInstances = 8;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t cell_seed(std::uint64_t seed, std::string_view name, std::size_t dim) {
    return splitmix64(splitmix64(seed ^ fnv1a(name)) + dim);
}

double max_abs(const ComplexMatrix& a) {
    double m = 0.0;
    for (Complex z : a.entries()) m = std::max(m, std::abs(z));
    return m;
}

/// Largest off-diagonal |h(k, j)|, lowest indices on ties.
std::pair<std::size_t, std::size_t> strongest_pair(const ComplexMatrix& h) {
    std::pair<std::size_t, std::size_t> best{0, 1};
    double mag = -1.0;
    for (std::size_t j = 0; j < h.cols(); ++j)
        for (std::size_t k = 0; k < h.rows(); ++k)
            if (k != j && std::abs(h(k, j)) > mag * (1 + 1e-12)) {
                mag = std::abs(h(k, j));
                best = {j, k};
            }
    return best;
}

struct Context {
    std::size_t dim;
    Rng& rng;
    bool inject_nonunitary;
};

/// Returns the worst residual over the cell.
using Measure = std::function<double(Context&)>;

struct Invariant {
    const char* module;
    const char* name;
    double tolerance;
    Measure measure;
    bool spin_only = false;
};

double eig_reconstruction(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix h = random_hermitian(c.dim, c.rng);
        EigenDecomposition e = hermitian_eig(h);
        ComplexMatrix rebuilt =
            e.eigenvectors * ComplexMatrix::diagonal(std::span<const double>(e.eigenvalues)) * adjoint(e.eigenvectors);
        worst = std::max(worst, frobenius_norm(rebuilt - h) / frobenius_norm(h));
    }
    return worst;
}

double eig_orthonormality(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i)
        worst = std::max(worst, unitarity_residual(hermitian_eig(random_hermitian(c.dim, c.rng)).eigenvectors));
    return worst;
}

double expm_cross_oracle(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix h = random_hermitian(c.dim, c.rng);
        double t = c.rng.uniform(0.0, 10.0) / frobenius_norm(h);
        worst = std::max(worst, frobenius_norm(expm_hermitian(h, t) - expm_oracle(Complex(0.0, -t) * h)));
    }
    return worst;
}

double kron_mixed_product(Context& c) {
    double worst = 0.0;
    std::size_t n = std::min<std::size_t>(c.dim, 4);
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix a = random_complex(n, c.rng), b = random_complex(n, c.rng);
        ComplexMatrix x = random_complex(n, c.rng), y = random_complex(n, c.rng);
        worst = std::max(worst, max_abs(kron(a, b) * kron(x, y) - kron(a * x, b * y)));
    }
    return worst;
}

double partial_trace_of_product(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        DensityMatrix ra = random_density(2, c.rng), rb = random_density(c.dim, c.rng);
        ComplexMatrix joint = kron(ra.matrix(), rb.matrix());
        worst = std::max(worst, max_abs(partial_trace(joint, 2, c.dim, Subsystem::A) - ra.matrix()));
        worst = std::max(worst, max_abs(partial_trace(joint, 2, c.dim, Subsystem::B) - rb.matrix()));
    }
    return worst;
}

double entropy_pure(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i)
        worst = std::max(worst, std::abs(von_neumann_entropy(pure_density(random_pure_state(c.dim, c.rng)))));
    return worst;
}

double entropy_maximal(Context& c) {
    return std::abs(von_neumann_entropy(DensityMatrix::maximally_mixed(c.dim)) - std::log(static_cast<double>(c.dim)));
}

double entropy_bounds(Context& c) {
    double worst = 0.0;
    const double cap = std::log(static_cast<double>(c.dim));
    for (int i = 0; i < kInstances; ++i) {
        double s = von_neumann_entropy(random_density(c.dim, c.rng));
        worst = std::max({worst, -s, s - cap});
    }
    return std::max(worst, 0.0);
}

double mixture_matches_shannon(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        std::vector<double> w(c.dim);
        double sum = 0.0;
        for (double& x : w) sum += (x = c.rng.uniform());
        for (double& x : w) x /= sum;
        ProbabilityVector p(w);
        OrthonormalBasis basis = OrthonormalBasis::eigenbasis(random_hermitian(c.dim, c.rng));
        worst = std::max(worst, std::abs(von_neumann_entropy(mixture_density(basis, p)) - shannon_entropy(p)));
    }
    return worst;
}

double entropy_invariance(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        DensityMatrix rho = random_density(c.dim, c.rng);
        HamiltonianOperator h(random_hermitian(c.dim, c.rng));
        double t = c.rng.uniform(0.0, 10.0);
        double s0 = von_neumann_entropy(rho);
        double st = 0.0;
        if (c.inject_nonunitary) {
            ComplexMatrix m = propagator(h, t).matrix();
            m(0, 0) *= 3.0;
            ComplexMatrix out = m * rho.matrix() * adjoint(m);
            out *= Complex(1.0 / trace(out).real());
            st = von_neumann_entropy(DensityMatrix(std::move(out)));
        } else {
            st = von_neumann_entropy(evolve_density(rho, h, t));
        }
        worst = std::max(worst, std::abs(st - s0));
    }
    return worst;
}

double propagator_group_law(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        HamiltonianOperator h(random_hermitian(c.dim, c.rng));
        double t1 = c.rng.uniform(-3.0, 3.0), t2 = c.rng.uniform(-3.0, 3.0);
        ComplexMatrix lhs = propagator(h, t1).matrix() * propagator(h, t2).matrix();
        worst = std::max(worst, frobenius_norm(lhs - propagator(h, t1 + t2).matrix()));
    }
    return worst;
}

double picture_agreement(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix x0 = random_hermitian(c.dim, c.rng);
        DensityMatrix rho = random_density(c.dim, c.rng);
        HamiltonianOperator h(random_hermitian(c.dim, c.rng));
        PictureValues v = picture_equivalence(x0, rho, h, c.rng.uniform(0.0, 10.0));
        double scale = std::max({std::abs(v.schrodinger), std::abs(v.heisenberg), 1.0});
        worst = std::max(worst, std::abs(v.schrodinger - v.heisenberg) / scale);
    }
    return worst;
}

/// |ratio / 4 - 1| for the central-difference error at delta and delta / 2.
double eom_convergence(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        HamiltonianOperator h(random_hermitian(c.dim, c.rng));
        ComplexMatrix x0 = random_hermitian(c.dim, c.rng);
        DensityMatrix rho = random_density(c.dim, c.rng);
        double t = c.rng.uniform(0.0, 5.0);
        double exact = expectation(heisenberg_rhs(heisenberg_observable(x0, h, t), h), rho);
        auto error = [&](double d) {
            double fd = (expectation(heisenberg_observable(x0, h, t + d), rho) -
                         expectation(heisenberg_observable(x0, h, t - d), rho)) / (2 * d);
            return std::abs(fd - exact);
        };
        worst = std::max(worst, std::abs(error(1e-3) / error(5e-4) / 4.0 - 1.0));
    }
    return worst;
}

/// |ratio - 1| / (t ||H'||_F)^2 for real-symmetric H' at t ||H'||_F in {1e-3, 1e-2}.
double first_order_t2_band(Context& c) {
    double worst = 0.0;
    OrthonormalBasis basis = OrthonormalBasis::standard(c.dim);
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix hm = random_real_symmetric(c.dim, c.rng);
        HamiltonianOperator h(hm);
        auto [j, k] = strongest_pair(hm);
        for (double x : {1e-3, 1e-2}) {
            double t = x / frobenius_norm(hm);
            double ratio = transition_probability_exact(basis, j, k, h, t) /
                           transition_probability_first_order(basis, j, k, h, t);
            worst = std::max(worst, std::abs(ratio - 1.0) / (x * x));
        }
    }
    return worst;
}

/// |ratio - 1| for complex Hermitian H' at t ||H'||_F = 0.01.
double first_order_ratio_window(Context& c) {
    double worst = 0.0;
    OrthonormalBasis basis = OrthonormalBasis::standard(c.dim);
    for (int i = 0; i < kInstances; ++i) {
        ComplexMatrix hm = random_hermitian(c.dim, c.rng);
        HamiltonianOperator h(hm);
        auto [j, k] = strongest_pair(hm);
        double t = 0.01 / frobenius_norm(hm);
        double ratio = transition_probability_exact(basis, j, k, h, t) /
                       transition_probability_first_order(basis, j, k, h, t);
        worst = std::max(worst, std::abs(ratio - 1.0));
    }
    return worst;
}

double rabi_oracle(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        double delta = c.rng.uniform(-3.0, 3.0), omega = c.rng.uniform(-3.0, 3.0);
        double w = std::hypot(delta, omega);
        for (int p = 0; p <= 50; ++p) {
            double t = 20.0 * p / 50.0;
            double s = std::sin(w * t / 2.0);
            double oracle = omega * omega / (w * w) * s * s;
            worst = std::max(worst, std::abs(rabi_populations({delta, omega}, t).beta - oracle));
        }
    }
    return worst;
}

double lattice_basis_residual(Context& c) {
    LatticeFreeParticle sys(c.dim, c.rng.uniform(0.5, 5.0), 1.0);
    BasisResiduals r = basis_residuals(lattice_momentum_basis(sys));
    return std::max(r.orthonormality, r.completeness.value_or(0.0));
}

double lattice_eigenstates(Context& c) {
    LatticeFreeParticle sys(c.dim, c.rng.uniform(0.5, 5.0), c.rng.uniform(0.5, 2.0));
    HamiltonianOperator h = lattice_hamiltonian(sys);
    OrthonormalBasis basis = lattice_momentum_basis(sys);
    std::vector<double> p = sys.momenta();
    double scale = std::max(1.0, frobenius_norm(h.matrix()));
    double worst = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        ComplexVector hv = apply(h.matrix(), basis[k].amplitudes());
        double e = p[k] * p[k] / (2.0 * sys.mass());
        for (std::size_t s = 0; s < hv.size(); ++s) worst = std::max(worst, std::abs(hv[s] - e * basis[k][s]) / scale);
    }
    return worst;
}

double composite_additivity(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        DensityMatrix ra = random_density(2, c.rng), rb = random_density(c.dim, c.rng);
        worst = std::max(worst, std::abs(von_neumann_entropy(compose_density(ra, rb)) - von_neumann_entropy(ra) -
                                         von_neumann_entropy(rb)));
    }
    return worst;
}

double composite_isolation(Context& c) {
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        HamiltonianOperator ha(random_hermitian(2, c.rng)), hb(random_hermitian(c.dim, c.rng));
        DensityMatrix ra = random_density(2, c.rng), rb = random_density(c.dim, c.rng);
        double t = c.rng.uniform(0.0, 5.0);
        HamiltonianOperator h = composite_hamiltonian(CompositeSystem(ha, hb, ComplexMatrix(2 * c.dim, 2 * c.dim)));
        DensityMatrix joint = evolve_density(compose_density(ra, rb), h, t);
        DensityMatrix separate = compose_density(evolve_density(ra, ha, t), evolve_density(rb, hb, t));
        worst = std::max(worst, frobenius_norm(joint.matrix() - separate.matrix()));
    }
    return worst;
}

double coupled_global_entropy(Context& c) {
    double worst = 0.0;
    std::size_t nb = c.dim;
    for (int i = 0; i < kInstances; ++i) {
        HamiltonianOperator ha(random_hermitian(2, c.rng)), hb(random_hermitian(nb, c.rng));
        ComplexMatrix coupling = random_hermitian(2 * nb, c.rng);
        coupling *= Complex(0.3);
        HamiltonianOperator h = composite_hamiltonian(CompositeSystem(ha, hb, coupling));
        DensityMatrix rho = random_density(2 * nb, c.rng);
        double s0 = von_neumann_entropy(rho);
        worst = std::max(worst, std::abs(von_neumann_entropy(evolve_density(rho, h, c.rng.uniform(0.0, 10.0))) - s0));
    }
    return worst;
}

const std::vector<Invariant>& invariants() {
    static const std::vector<Invariant> all = {
        {"linalg", "eig_reconstruction", 1e-12, eig_reconstruction},
        {"linalg", "eig_orthonormality", 1e-12, eig_orthonormality},
        {"linalg", "expm_cross_oracle", 1e-9, expm_cross_oracle},
        {"linalg", "kron_mixed_product", 1e-10, kron_mixed_product},
        {"linalg", "partial_trace_of_product", 1e-12, partial_trace_of_product},
        {"ensembles", "entropy_pure_state", 1e-8, entropy_pure},
        {"ensembles", "entropy_maximally_mixed", 1e-10, entropy_maximal},
        {"ensembles", "entropy_bounds", 1e-10, entropy_bounds},
        {"ensembles", "mixture_entropy_is_shannon", 1e-9, mixture_matches_shannon},
        {"dynamics", "entropy_invariance", 1e-9, entropy_invariance},
        {"dynamics", "propagator_group_law", 1e-9, propagator_group_law},
        {"dynamics", "picture_equivalence", 1e-9, picture_agreement},
        {"dynamics", "heisenberg_eom_convergence", 0.2, eom_convergence},
        {"dynamics", "first_order_t2_band_real_symmetric", 5.0, first_order_t2_band},
        {"dynamics", "first_order_ratio_window", 0.01, first_order_ratio_window},
        {"systems", "rabi_oracle", 1e-9, rabi_oracle, true},
        {"systems", "lattice_basis_identities", 1e-12, lattice_basis_residual},
        {"systems", "lattice_momentum_eigenstates", 1e-12, lattice_eigenstates},
        {"systems", "composite_additivity", 1e-9, composite_additivity},
        {"systems", "composite_isolation", 1e-9, composite_isolation},
        {"systems", "coupled_global_entropy", 1e-9, coupled_global_entropy},
    };
    return all;
}

}  // namespace

bool SuiteReport::passed() const {
    return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.passed; });
}

SuiteReport run_invariant_suite(const SuiteOptions& options) {
    if (options.dims.empty()) throw std::invalid_argument("invariant suite: no dimensions given");
    for (std::size_t d : options.dims)
        if (d < 2 || d > 64) throw std::invalid_argument("invariant suite: dimension " + std::to_string(d) + " outside [2, 64]");
    if (!(options.tolerance_scale > 0.0) || !std::isfinite(options.tolerance_scale))
        throw std::invalid_argument("invariant suite: tolerance scale must be positive");

    SuiteReport report;
    report.seed = options.seed;
    for (const Invariant& inv : invariants()) {
        std::vector<std::size_t> dims = inv.spin_only ? std::vector<std::size_t>{2} : options.dims;
        for (std::size_t d : dims) {
            Rng rng(cell_seed(options.seed, inv.name, d));
            Context ctx{d, rng, options.inject_nonunitary};
            double measured = inv.measure(ctx);
            double tol = inv.tolerance * options.tolerance_scale;
            report.results.push_back({inv.module, inv.name, d, measured, tol, measured <= tol});
        }
    }
    return report;
}

}  // namespace qdyn
