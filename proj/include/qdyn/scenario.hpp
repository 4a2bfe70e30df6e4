// scenario.hpp: declarative time-evolution runs and their reports
//
// A scenario is a JSON document (comments allowed):
//
//   {
//     "format": "qdyn-scenario/1",
//     "name": "rabi-resonant",
//     "system": {"kind": "spin-half", "delta": 0.0, "omega": 1.0},
//     "initial": {"state": "alpha"},
//     "time": {"start": 0.0, "stop": 3.141592653589793, "steps": 100},
//     "observables": ["sigma_z", "populations"],
//     "transitions": {"basis": "natural", "pairs": [[0, 1]]}
//   }
//
// Complex numbers are [re, im] pairs (a bare number is taken as real);
// matrices are row-major nested arrays of them.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/ensembles.hpp"
#include "qdyn/linalg.hpp"
#include "qdyn/systems.hpp"

namespace qdyn {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kScenarioFormat = "qdyn-scenario/1";
inline constexpr std::size_t kMaxTimeSteps = 1'000'000;
inline constexpr double kEntropyDriftTolerance = 1e-9;

/// Document is not well-formed: bad JSON, missing field, wrong type. Exit code 2.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Document is well-formed but describes an invalid object. Exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpinHalfSpec {
    double delta = 0.0;
    double omega = 0.0;
};

struct LatticeSpec {
    std::size_t sites = 0;
    double length = 0.0;
    double mass = 0.0;
};

/// Resolved composite: explicit factor Hamiltonians and coupling.
struct CompositeSpec {
    ComplexMatrix h1;
    ComplexMatrix h2;
    ComplexMatrix coupling;
};

struct ExplicitSpec {
    ComplexMatrix hamiltonian;
};

using SystemSpec = std::variant<SpinHalfSpec, LatticeSpec, CompositeSpec, ExplicitSpec>;

enum class BasisKind { Natural, Momentum, Energy };

struct NamedState {
    std::string label;
};
struct AmplitudeState {
    ComplexVector amplitudes;
};
struct MixtureState {
    std::vector<double> weights;
    BasisKind basis = BasisKind::Natural;
};
using InitialSpec = std::variant<NamedState, AmplitudeState, MixtureState>;

struct TimeGrid {
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 0;  // the grid has steps + 1 points

    std::size_t points() const noexcept { return steps + 1; }
    double at(std::size_t i) const noexcept;
};

struct ObservableSpec {
    /// sigma_x|y|z, sigma_{x,y,z}_{a,b}, energy, populations, site_populations,
    /// momentum_populations, subsystem_entropy_{a,b}, or a user label for an
    /// explicit matrix.
    std::string name;
    std::optional<ComplexMatrix> matrix;
};

struct TransitionSpec {
    BasisKind basis = BasisKind::Natural;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (from j, to k)
};

struct ScenarioSpec {
    std::string name;
    SystemSpec system;
    InitialSpec initial;
    TimeGrid time;
    std::vector<ObservableSpec> observables;
    std::optional<TransitionSpec> transitions;
};

/// Parse and validate. Throws ParseError or ValidationError; messages name the
/// offending field as a JSON pointer.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);

/// Canonical JSON text; parse_scenario(serialize_scenario(s)) is equivalent to s.
std::string serialize_scenario(const ScenarioSpec& spec);

/// Resolved objects for a validated spec.
HamiltonianOperator scenario_hamiltonian(const ScenarioSpec& spec);
DensityMatrix scenario_initial_state(const ScenarioSpec& spec);
OrthonormalBasis scenario_basis(const ScenarioSpec& spec, BasisKind kind);

struct EvolutionRecord {
    double t = 0.0;
    std::vector<double> values;  // one per column after t
};

struct InvariantCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct EvolutionReport {
    std::string command;              // "evolve" or "perturb"
    std::vector<std::string> columns; // excluding t
    std::vector<EvolutionRecord> records;
    std::vector<InvariantCheck> checks;

    bool passed() const;
};

/// Time series of entropy, observables and exact transition probabilities.
EvolutionReport run_scenario(const ScenarioSpec& spec);

/// Exact and first-order transition probabilities with H as the sole generator.
/// Requires a transitions section with j != k pairs.
EvolutionReport run_perturbation(const ScenarioSpec& spec);

/// Versioned comment line, header row, then one row per record at 15
/// significant digits.
void write_csv(const EvolutionReport& report, const ScenarioSpec& spec, std::ostream& out);
/// Sidecar JSON: version, resolved scenario, tolerances, checks.
void write_summary(const EvolutionReport& report, const ScenarioSpec& spec, std::ostream& out);

/// "%.15g", with negative zero printed as 0.
std::string format_number(double x);

}  // namespace qdyn
