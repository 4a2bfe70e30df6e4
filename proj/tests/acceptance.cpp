// Acceptance criteria 1-10, one PASS/FAIL line each.
//
// Exit status is 0 when every criterion's outcome matches its expectation.
// Criterion 6 is an expected failure on complex Hermitian H': the exact
// transition probability picks up a t^3 Im(H'_jk (H'^2)_kj) term, so the
// discrepancy is first order in t. The real-symmetric case, where that term
// vanishes, is printed alongside for reference.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"
#include "qdyn/random.hpp"
#include "qdyn/systems.hpp"
#include "test_support.hpp"

using namespace qdyn;
using qdyn::test::log_log_slope;
using qdyn::test::strongest_pair;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

// ---- 1 -------------------------------------------------------------------

Outcome entropy_invariance() {
    double worst = 0.0;
    int count = 0;
    for (std::size_t dim : {2, 4, 8, 16}) {
        Rng rng(1000 + dim);
        for (int i = 0; i < 200; ++i) {
            DensityMatrix rho = random_density(dim, rng);
            if (i % 4 == 3) {  // rank-deficient: mixture of two pure states
                const PureState a = random_pure_state(dim, rng), b = random_pure_state(dim, rng);
                ComplexMatrix m = Complex(0.35) * pure_density(a).matrix() + Complex(0.65) * pure_density(b).matrix();
                rho = DensityMatrix(std::move(m));
            }
            const HamiltonianOperator h(random_hermitian(dim, rng));
            const double t = rng.uniform(0.0, 10.0);
            worst = std::max(worst, std::abs(von_neumann_entropy(evolve_density(rho, h, t)) - von_neumann_entropy(rho)));
            ++count;
        }
    }
    return {worst <= 1e-9, std::to_string(count) + " triples, max |S(t) - S(0)| = " + sci(worst) + " (tol 1e-9)"};
}

// ---- 2 -------------------------------------------------------------------

Outcome entropy_endpoints() {
    double worst_pure = 0.0, worst_mixed = 0.0;
    Rng rng(2002);
    for (std::size_t n = 2; n <= 16; ++n) {
        for (int i = 0; i < 20; ++i)
            worst_pure = std::max(worst_pure, std::abs(von_neumann_entropy(pure_density(random_pure_state(n, rng)))));
        worst_pure = std::max(worst_pure, std::abs(von_neumann_entropy(pure_density(PureState::basis_vector(n, n / 2)))));
        worst_mixed = std::max(worst_mixed, std::abs(von_neumann_entropy(DensityMatrix::maximally_mixed(n)) -
                                                     std::log(static_cast<double>(n))));
    }
    return {worst_pure <= 1e-8 && worst_mixed <= 1e-10,
            "N = 2..16, max S(pure) = " + sci(worst_pure) + " (tol 1e-8), max |S(1/N) - ln N| = " + sci(worst_mixed) +
                " (tol 1e-10)"};
}

// ---- 3 -------------------------------------------------------------------

Outcome picture_equivalence_check() {
    double worst = 0.0;
    for (std::size_t dim : {2, 4, 8, 16}) {
        Rng rng(3000 + dim);
        for (int i = 0; i < 100; ++i) {
            const ComplexMatrix x0 = random_hermitian(dim, rng);
            const DensityMatrix rho = random_density(dim, rng);
            const HamiltonianOperator h(random_hermitian(dim, rng));
            const PictureValues v = picture_equivalence(x0, rho, h, rng.uniform(0.0, 10.0));
            const double scale = std::max({std::abs(v.schrodinger), std::abs(v.heisenberg), 1e-300});
            worst = std::max(worst, std::abs(v.schrodinger - v.heisenberg) / scale);
        }
    }
    return {worst <= 1e-9, "100 instances x dims {2,4,8,16}, max relative gap = " + sci(worst) + " (tol 1e-9)"};
}

// ---- 4 -------------------------------------------------------------------

Outcome heisenberg_eom() {
    Rng rng(4004);
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 2 + rng.index(7);
        const HamiltonianOperator h(random_hermitian(n, rng));
        const ComplexMatrix x0 = random_hermitian(n, rng);
        const DensityMatrix rho = random_density(n, rng);
        const double t = rng.uniform(0.0, 5.0);
        const double exact = expectation(heisenberg_rhs(heisenberg_observable(x0, h, t), h), rho);
        auto error = [&](double d) {
            const double fd = (expectation(heisenberg_observable(x0, h, t + d), rho) -
                               expectation(heisenberg_observable(x0, h, t - d), rho)) / (2 * d);
            return std::abs(fd - exact);
        };
        const double ratio = error(1e-3) / error(5e-4);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    return {lo >= 3.2 && hi <= 4.8,
            "20 instances, error ratio for delta -> delta/2 in [" + sci(lo) + ", " + sci(hi) + "] (want 4 +- 20%)"};
}

// ---- 5 -------------------------------------------------------------------

// p_beta(t) = omega^2 / (delta^2 + omega^2) sin^2(sqrt(delta^2 + omega^2) t / 2)
double rabi_closed_form(double delta, double omega, double t) {
    const double w2 = delta * delta + omega * omega;
    const double s = std::sin(std::sqrt(w2) * t / 2.0);
    return omega * omega / w2 * s * s;
}

Outcome rabi_oracle() {
    double worst = 0.0;
    for (auto [delta, omega] : {std::pair{0.0, 1.0}, std::pair{1.0, 1.0}, std::pair{3.0, 4.0}}) {
        for (int i = 0; i < 1000; ++i) {
            const double t = 20.0 * i / 999.0;
            worst = std::max(worst, std::abs(rabi_populations({delta, omega}, t).beta - rabi_closed_form(delta, omega, t)));
        }
    }
    return {worst <= 1e-9, "(0,1), (1,1), (3,4) x 1000 points on [0, 20], max deviation = " + sci(worst) + " (tol 1e-9)"};
}

// ---- 6 -------------------------------------------------------------------

struct T2Stats {
    double band = 0.0;  // max |ratio - 1| / (5 (t||H'||)^2)
    double slope_lo = INFINITY;
    double slope_hi = -INFINITY;
    int instances = 0;
};

T2Stats t2_law(bool real_symmetric) {
    T2Stats s;
    for (std::size_t dim = 4; dim <= 8; ++dim) {
        Rng rng(6000 + dim);
        const OrthonormalBasis basis = OrthonormalBasis::standard(dim);
        for (int i = 0; i < 20; ++i) {
            const ComplexMatrix hm = real_symmetric ? random_real_symmetric(dim, rng) : random_hermitian(dim, rng);
            const HamiltonianOperator h(hm);
            const auto [j, k] = strongest_pair(hm);
            const double norm = frobenius_norm(hm);
            auto discrepancy = [&](double x) {
                const double t = x / norm;
                return std::abs(transition_probability_exact(basis, j, k, h, t) /
                                    transition_probability_first_order(basis, j, k, h, t) -
                                1.0);
            };
            for (double x : {1e-3, 1e-2}) s.band = std::max(s.band, discrepancy(x) / (5 * x * x));
            const std::vector<double> xs = {1e-3, 1e-2, 1e-1};
            std::vector<double> ds;
            for (double x : xs) ds.push_back(discrepancy(x));
            const double slope = log_log_slope(xs, ds);
            s.slope_lo = std::min(s.slope_lo, slope);
            s.slope_hi = std::max(s.slope_hi, slope);
            ++s.instances;
        }
    }
    return s;
}

std::string t2_detail(const T2Stats& s) {
    return std::to_string(s.instances) + " instances, dims 4..8, worst band use = " + sci(s.band) +
           " (tol 1), slopes in [" + sci(s.slope_lo) + ", " + sci(s.slope_hi) + "] (want 2 +- 0.2)";
}

bool t2_passes(const T2Stats& s) { return s.band <= 1.0 && s.slope_lo >= 1.8 && s.slope_hi <= 2.2; }

Outcome t2_law_complex() {
    const T2Stats s = t2_law(false);
    return {t2_passes(s), "complex Hermitian H': " + t2_detail(s)};
}

// ---- 7 -------------------------------------------------------------------

Outcome basis_identities() {
    BasisResiduals spin = basis_residuals(OrthonormalBasis({spin_alpha(), spin_beta()}));
    double worst = std::max(spin.orthonormality, spin.completeness.value_or(INFINITY));
    for (std::size_t n = 2; n <= 64; ++n) {
        const BasisResiduals r = basis_residuals(lattice_momentum_basis(LatticeFreeParticle(n, 1.0, 1.0)));
        worst = std::max({worst, r.orthonormality, r.completeness.value_or(INFINITY)});
    }
    return {worst <= 1e-12, "spin-1/2 and DFT bases n = 2..64, max residual = " + sci(worst) + " (tol 1e-12)"};
}

// ---- 8 -------------------------------------------------------------------

Outcome composite_systems() {
    Rng rng(8008);
    double additivity = 0.0, isolation = 0.0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t na = 2 + rng.index(3), nb = 2 + rng.index(3);
        const DensityMatrix ra = random_density(na, rng), rb = random_density(nb, rng);
        additivity = std::max(additivity, std::abs(von_neumann_entropy(compose_density(ra, rb)) -
                                                   von_neumann_entropy(ra) - von_neumann_entropy(rb)));
        const HamiltonianOperator ha(random_hermitian(na, rng)), hb(random_hermitian(nb, rng));
        const double t = rng.uniform(0.0, 10.0);
        const HamiltonianOperator h = composite_hamiltonian(CompositeSystem(ha, hb, ComplexMatrix(na * nb, na * nb)));
        const DensityMatrix joint = evolve_density(compose_density(ra, rb), h, t);
        const DensityMatrix separate = compose_density(evolve_density(ra, ha, t), evolve_density(rb, hb, t));
        isolation = std::max(isolation, frobenius_norm(joint.matrix() - separate.matrix()));
    }

    const HamiltonianOperator hz = spin_hamiltonian({1.0, 0.0});
    const HamiltonianOperator h = composite_hamiltonian(CompositeSystem(hz, hz, xx_coupling(0.3)));
    const DensityMatrix rho0 = compose_density(pure_density(spin_alpha()), pure_density(spin_alpha()));
    const double s0 = von_neumann_entropy(rho0);
    double drift = 0.0, peak = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const DensityMatrix rho = evolve_density(rho0, h, 0.1 * i);
        drift = std::max(drift, std::abs(von_neumann_entropy(rho) - s0));
        peak = std::max(peak, von_neumann_entropy(reduced_density(rho, 2, 2, Subsystem::A)));
    }
    const bool ok = additivity <= 1e-9 && isolation <= 1e-9 && drift <= 1e-9 && peak >= 0.1;
    return {ok, "additivity " + sci(additivity) + ", isolation " + sci(isolation) + " (tol 1e-9); g = 0.3 demo: global drift " +
                    sci(drift) + " (tol 1e-9), max S_A = " + sci(peak) + " (need >= 0.1)"};
}

// ---- 9 -------------------------------------------------------------------

Outcome expm_cross_oracle() {
    Rng rng(9009);
    double worst = 0.0, largest = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 2 + rng.index(15);
        const ComplexMatrix h = random_hermitian(n, rng);
        const double target = rng.uniform(0.0, 10.0);
        const double t = target / frobenius_norm(h);
        largest = std::max(largest, target);
        worst = std::max(worst, frobenius_norm(expm_hermitian(h, t) - expm_oracle(Complex(0.0, -t) * h)));
    }
    return {worst <= 1e-9, "100 instances, ||Ht||_F up to " + sci(largest) + ", max Frobenius gap = " + sci(worst) +
                               " (tol 1e-9)"};
}

// ---- 10 ------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Outcome cli_determinism() {
    const std::string cli = QDYN_CLI_PATH;
    const std::string fixtures = QDYN_FIXTURE_DIR;
    std::string detail;
    bool ok = true;
    for (const char* name : {"spin_half", "lattice", "composite"}) {
        std::string runs[2];
        for (int r = 0; r < 2; ++r) {
            const std::string out = std::string("acceptance_") + name + "_" + std::to_string(r) + ".csv";
            std::remove(out.c_str());
            const std::string cmd = "\"" + cli + "\" evolve \"" + fixtures + "/" + name + ".json\" --out " + out;
            const int status = std::system(cmd.c_str());
            if (status != 0) ok = false;
            runs[r] = slurp(out);
        }
        const bool same = !runs[0].empty() && runs[0] == runs[1];
        ok = ok && same;
        detail += std::string(detail.empty() ? "" : ", ") + name + (same ? " identical" : " DIFFER") + " (" +
                  std::to_string(runs[0].size()) + " bytes)";
    }
    return {ok, "evolve twice: " + detail};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        Outcome (*run)();
        bool expect_pass;
    };
    const Criterion criteria[] = {
        {1, "entropy invariance", entropy_invariance, true},
        {2, "pure/maximal entropy endpoints", entropy_endpoints, true},
        {3, "picture equivalence", picture_equivalence_check, true},
        {4, "Heisenberg equation of motion", heisenberg_eom, true},
        {5, "Rabi oracle", rabi_oracle, true},
        {6, "t^2 law", t2_law_complex, false},
        {7, "basis identities", basis_identities, true},
        {8, "composite additivity and isolation", composite_systems, true},
        {9, "matrix-exponential cross-oracle", expm_cross_oracle, true},
        {10, "end-to-end determinism", cli_determinism, true},
    };

    const auto start = std::chrono::steady_clock::now();
    int passed = 0, unexpected = 0;
    for (const Criterion& c : criteria) {
        const Outcome o = c.run();
        passed += o.passed ? 1 : 0;
        const bool as_expected = o.passed == c.expect_pass;
        unexpected += as_expected ? 0 : 1;
        std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.title << ": " << o.detail;
        if (!c.expect_pass) std::cout << (o.passed ? " [unexpected pass]" : " [expected failure]");
        std::cout << "\n";
        if (c.id == 6) {
            const T2Stats s = t2_law(true);
            std::cout << "[INFO] 6. t^2 law, real-symmetric H' (" << (t2_passes(s) ? "within" : "outside")
                      << " the stated bounds): " << t2_detail(s) << "\n";
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << passed << "/10 criteria passed, " << unexpected << " unexpected outcome(s), " << sci(seconds) << " s\n";
    return unexpected == 0 ? 0 : 1;
}
