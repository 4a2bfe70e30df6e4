// qdyn: command-line front end: verify, evolve, rabi, perturb, basis-check
//
// Exit codes: 0 success, 1 invariant or validation failure, 2 malformed input.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdyn/ensembles.hpp"
#include "qdyn/errors.hpp"
#include "qdyn/invariant_suite.hpp"
#include "qdyn/scenario.hpp"
#include "qdyn/systems.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kMalformed = 2;

constexpr double kRabiTolerance = 1e-9;
constexpr double kBasisTolerance = 1e-12;

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

/// Writes to path, or stdout when path is empty.
template <typename F>
void emit(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write(out);
    if (!out) throw std::runtime_error("failed writing " + path);
}

int report_checks(const qdyn::EvolutionReport& report) {
    int status = kOk;
    for (const auto& c : report.checks) {
        if (!c.passed) {
            std::cerr << "qdyn: invariant " << c.name << " failed: measured " << sci(c.measured) << " > tolerance "
                      << sci(c.tolerance) << "\n";
            status = kFailed;
        }
    }
    return status;
}

int cmd_verify(std::uint64_t seed, const std::vector<std::size_t>& dims, double scale, bool inject) {
    qdyn::SuiteOptions opts;
    opts.seed = seed;
    opts.dims = dims;
    opts.tolerance_scale = scale;
    opts.inject_nonunitary = inject;
    const qdyn::SuiteReport report = qdyn::run_invariant_suite(opts);

    std::cout << "# qdyn " << qdyn::kVersion << " verify seed=" << seed << " tolerance-scale=" << qdyn::format_number(scale)
              << "\n";
    std::cout << "module,invariant,dim,measured,tolerance,status\n";
    std::size_t failed = 0;
    for (const auto& r : report.results) {
        std::cout << r.module << ',' << r.name << ',' << r.dim << ',' << sci(r.measured) << ',' << sci(r.tolerance) << ','
                  << (r.passed ? "PASS" : "FAIL") << "\n";
        failed += r.passed ? 0 : 1;
    }
    if (failed == 0) {
        std::cout << "# all " << report.results.size() << " checks passed\n";
        return kOk;
    }
    std::cout << "# " << failed << " of " << report.results.size() << " checks failed\n";
    return kFailed;
}

int cmd_evolve(const std::string& file, const std::string& out, const std::string& summary) {
    const qdyn::ScenarioSpec spec = qdyn::load_scenario(file);
    const qdyn::EvolutionReport report = qdyn::run_scenario(spec);
    emit(out, [&](std::ostream& os) { qdyn::write_csv(report, spec, os); });
    if (!summary.empty()) emit(summary, [&](std::ostream& os) { qdyn::write_summary(report, spec, os); });
    return report_checks(report);
}

int cmd_perturb(const std::string& file, const std::string& out, const std::string& summary) {
    const qdyn::ScenarioSpec spec = qdyn::load_scenario(file);
    const qdyn::EvolutionReport report = qdyn::run_perturbation(spec);
    emit(out, [&](std::ostream& os) { qdyn::write_csv(report, spec, os); });
    if (!summary.empty()) emit(summary, [&](std::ostream& os) { qdyn::write_summary(report, spec, os); });
    return report_checks(report);
}

int cmd_rabi(double delta, double omega, double t_max, std::size_t points) {
    if (!std::isfinite(delta) || !std::isfinite(omega) || !std::isfinite(t_max) || t_max < 0.0 || points < 1)
        throw qdyn::ValidationError("rabi: need finite delta, omega, t-max >= 0 and at least one point");
    const double w = std::hypot(delta, omega);
    std::cout << "# qdyn " << qdyn::kVersion << " rabi delta=" << qdyn::format_number(delta)
              << " omega=" << qdyn::format_number(omega) << "\n";
    std::cout << "t,pAlpha,pBeta,pBeta_closed_form\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : (i + 1 == points ? t_max : t_max * static_cast<double>(i) / (points - 1));
        const qdyn::RabiPopulations p = qdyn::rabi_populations({delta, omega}, t);
        double closed = 0.0;
        if (w > 0.0) {
            const double s = std::sin(w * t / 2.0);
            closed = omega * omega / (w * w) * s * s;
        }
        worst = std::max(worst, std::abs(p.beta - closed));
        std::cout << qdyn::format_number(t) << ',' << qdyn::format_number(p.alpha) << ',' << qdyn::format_number(p.beta)
                  << ',' << qdyn::format_number(closed) << "\n";
    }
    if (worst > kRabiTolerance) {
        std::cerr << "qdyn: rabi deviation " << sci(worst) << " exceeds " << sci(kRabiTolerance) << "\n";
        return kFailed;
    }
    return kOk;
}

int cmd_basis_check(std::size_t max_n) {
    if (max_n < 2 || max_n > 256) throw qdyn::ValidationError("basis-check: --lattice-n must be in [2, 256]");
    std::cout << "# qdyn " << qdyn::kVersion << " basis-check lattice-n=" << max_n << "\n";
    std::cout << "basis,n,orthonormality,completeness,status\n";
    bool ok = true;
    auto row = [&](const std::string& name, std::size_t n, const qdyn::BasisResiduals& r) {
        const double c = r.completeness.value_or(0.0);
        const bool pass = r.orthonormality <= kBasisTolerance && c <= kBasisTolerance;
        ok = ok && pass;
        std::cout << name << ',' << n << ',' << sci(r.orthonormality) << ',' << sci(c) << ',' << (pass ? "PASS" : "FAIL")
                  << "\n";
    };
    row("spin-half", 2, qdyn::basis_residuals(qdyn::OrthonormalBasis({qdyn::spin_alpha(), qdyn::spin_beta()})));
    for (std::size_t n = 2; n <= max_n; ++n)
        row("lattice-momentum", n,
            qdyn::basis_residuals(qdyn::lattice_momentum_basis(qdyn::LatticeFreeParticle(n, 1.0, 1.0))));
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-preserving quantum dynamics: invariant suite and scenario runner", "qdyn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qdyn::kVersion);

    std::uint64_t seed = qdyn::SuiteOptions{}.seed;
    std::vector<std::size_t> dims = qdyn::SuiteOptions{}.dims;
    double tol_scale = 1.0;
    bool inject = false;
    auto* verify = app.add_subcommand("verify", "Run the seeded invariant suite");
    verify->add_option("--seed", seed, "Master seed")->capture_default_str();
    verify->add_option("--dims", dims, "Comma-separated dimensions")->delimiter(',')->capture_default_str();
    verify->add_option("--tolerance-scale", tol_scale, "Multiply every tolerance")->capture_default_str();
    verify->add_flag("--inject-nonunitary", inject)->group("");

    std::string file, out, summary;
    auto* evolve = app.add_subcommand("evolve", "Run a scenario and write its CSV time series");
    evolve->add_option("scenario", file, "Scenario file")->required();
    evolve->add_option("--out", out, "CSV path (default stdout)");
    evolve->add_option("--summary", summary, "Sidecar JSON summary path");

    auto* perturb = app.add_subcommand("perturb", "Exact versus first-order transition probabilities");
    perturb->add_option("scenario", file, "Scenario file")->required();
    perturb->add_option("--out", out, "CSV path (default stdout)");
    perturb->add_option("--summary", summary, "Sidecar JSON summary path");

    double delta = 0.0, omega = 1.0, t_max = 20.0;
    std::size_t points = 1000;
    auto* rabi = app.add_subcommand("rabi", "Spin-1/2 populations against the closed form");
    rabi->add_option("--delta", delta, "Level splitting")->capture_default_str();
    rabi->add_option("--omega", omega, "Drive strength")->capture_default_str();
    rabi->add_option("--t-max", t_max, "Final time")->capture_default_str();
    rabi->add_option("--points", points, "Number of time points")->capture_default_str();

    std::size_t lattice_n = 64;
    auto* basis = app.add_subcommand("basis-check", "Orthonormality and completeness of the standard bases");
    basis->add_option("--lattice-n", lattice_n, "Largest lattice size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kMalformed;
    }

    try {
        if (*verify) {
            try {
                return cmd_verify(seed, dims, tol_scale, inject);
            } catch (const std::invalid_argument& e) {
                std::cerr << "qdyn: malformed input: " << e.what() << "\n";
                return kMalformed;
            }
        }
        if (*evolve) return cmd_evolve(file, out, summary);
        if (*perturb) return cmd_perturb(file, out, summary);
        if (*rabi) return cmd_rabi(delta, omega, t_max, points);
        if (*basis) return cmd_basis_check(lattice_n);
    } catch (const qdyn::ParseError& e) {
        std::cerr << "qdyn: malformed input: " << e.what() << "\n";
        return kMalformed;
    } catch (const qdyn::ValidationError& e) {
        std::cerr << "qdyn: invalid input: " << e.what() << "\n";
        return kFailed;
    } catch (const std::exception& e) {
        std::cerr << "qdyn: " << e.what() << "\n";
        return kFailed;
    }
    return kFailed;
}
