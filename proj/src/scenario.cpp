#include "qdyn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "qdyn/errors.hpp"

namespace qdyn {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxDimension = 256;
constexpr double kHermitianTolerance = 1e-10;
constexpr double kFirstOrderWindow = 0.01;  // on t ||H||_F
constexpr double kFirstOrderRatioTolerance = 0.01;

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

// ---- JSON readers ----------------------------------------------------------

const Json& field(const Json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(path.empty() ? "/" : path, std::string("missing field \"") + key + "\"");
    return *it;
}

void expect_object(const Json& j, const std::string& path) {
    if (!j.is_object()) malformed(path.empty() ? "/" : path, "expected an object");
}

void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) malformed(path + "/" + key, "unknown field");
    }
}

double read_number(const Json& j, const std::string& path) {
    if (!j.is_number()) malformed(path, "expected a number");
    double x = j.get<double>();
    if (!std::isfinite(x)) invalid(path, "value is not finite");
    return x;
}

std::size_t read_count(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned()) malformed(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::string read_string(const Json& j, const std::string& path) {
    if (!j.is_string()) malformed(path, "expected a string");
    return j.get<std::string>();
}

Complex read_complex(const Json& j, const std::string& path) {
    if (j.is_number()) return {read_number(j, path), 0.0};
    if (!j.is_array() || j.size() != 2) malformed(path, "expected a number or an [re, im] pair");
    return {read_number(j[0], path + "/0"), read_number(j[1], path + "/1")};
}

ComplexVector read_vector(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) malformed(path, "expected a non-empty array");
    ComplexVector v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(read_complex(j[i], path + "/" + std::to_string(i)));
    return v;
}

std::vector<double> read_reals(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) malformed(path, "expected a non-empty array of numbers");
    std::vector<double> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(read_number(j[i], path + "/" + std::to_string(i)));
    return v;
}

ComplexMatrix read_matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) malformed(path, "expected a non-empty array of rows");
    std::size_t cols = 0;
    std::vector<Complex> entries;
    for (std::size_t r = 0; r < j.size(); ++r) {
        std::string rpath = path + "/" + std::to_string(r);
        ComplexVector row = read_vector(j[r], rpath);
        if (r == 0)
            cols = row.size();
        else if (row.size() != cols)
            malformed(rpath, "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return ComplexMatrix(j.size(), cols, std::move(entries));
}

ComplexMatrix read_hermitian(const Json& j, const std::string& path) {
    ComplexMatrix m = read_matrix(j, path);
    if (!m.is_square())
        invalid(path, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", not square");
    if (m.rows() > kMaxDimension) invalid(path, "dimension exceeds " + std::to_string(kMaxDimension));
    if (!is_hermitian(m, kHermitianTolerance)) invalid(path, "matrix is not Hermitian");
    return m;
}

Json write_complex(Complex z) { return Json::array({z.real(), z.imag()}); }

Json write_vector(std::span<const Complex> v) {
    Json out = Json::array();
    for (Complex z : v) out.push_back(write_complex(z));
    return out;
}

Json write_matrix(const ComplexMatrix& m) {
    Json out = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(write_complex(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

const char* basis_name(BasisKind b) {
    switch (b) {
        case BasisKind::Natural: return "natural";
        case BasisKind::Momentum: return "momentum";
        case BasisKind::Energy: return "energy";
    }
    return "natural";
}

BasisKind read_basis(const Json& j, const std::string& path) {
    std::string s = read_string(j, path);
    if (s == "natural") return BasisKind::Natural;
    if (s == "momentum") return BasisKind::Momentum;
    if (s == "energy") return BasisKind::Energy;
    malformed(path, "unknown basis \"" + s + "\" (natural, momentum, energy)");
}

// ---- system ----------------------------------------------------------------

SpinHalfSpec read_spin(const Json& j, const std::string& path) {
    return {read_number(field(j, path, "delta"), path + "/delta"),
            read_number(field(j, path, "omega"), path + "/omega")};
}

/// A composite factor: {"delta", "omega"} for a spin-1/2 or {"hamiltonian": M}.
ComplexMatrix read_factor(const Json& j, const std::string& path) {
    expect_object(j, path);
    if (j.contains("hamiltonian")) {
        reject_unknown(j, path, {"hamiltonian"});
        return read_hermitian(j["hamiltonian"], path + "/hamiltonian");
    }
    reject_unknown(j, path, {"delta", "omega"});
    SpinHalfSpec s = read_spin(j, path);
    return spin_hamiltonian({s.delta, s.omega}).matrix();
}

SystemSpec read_system(const Json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = read_string(field(j, path, "kind"), path + "/kind");
    if (kind == "spin-half") {
        reject_unknown(j, path, {"kind", "delta", "omega"});
        return read_spin(j, path);
    }
    if (kind == "lattice") {
        reject_unknown(j, path, {"kind", "sites", "length", "mass"});
        LatticeSpec s{read_count(field(j, path, "sites"), path + "/sites"),
                      read_number(field(j, path, "length"), path + "/length"),
                      read_number(field(j, path, "mass"), path + "/mass")};
        if (s.sites < 2 || s.sites > kMaxDimension)
            invalid(path + "/sites", "must be in [2, " + std::to_string(kMaxDimension) + "]");
        if (!(s.length > 0.0)) invalid(path + "/length", "must be positive");
        if (!(s.mass > 0.0)) invalid(path + "/mass", "must be positive");
        return s;
    }
    if (kind == "composite") {
        reject_unknown(j, path, {"kind", "a", "b", "g", "coupling"});
        CompositeSpec c{read_factor(field(j, path, "a"), path + "/a"), read_factor(field(j, path, "b"), path + "/b"),
                        ComplexMatrix()};
        std::size_t d = c.h1.rows() * c.h2.rows();
        if (d > kMaxDimension) invalid(path, "total dimension exceeds " + std::to_string(kMaxDimension));
        if (j.contains("g") && j.contains("coupling")) malformed(path, "give either \"g\" or \"coupling\", not both");
        if (j.contains("coupling")) {
            c.coupling = read_hermitian(j["coupling"], path + "/coupling");
            if (c.coupling.rows() != d)
                invalid(path + "/coupling", "expected " + std::to_string(d) + "x" + std::to_string(d));
        } else if (j.contains("g")) {
            double g = read_number(j["g"], path + "/g");
            if (c.h1.rows() != 2 || c.h2.rows() != 2) invalid(path + "/g", "sigma_x (x) sigma_x needs two spin-1/2 factors");
            c.coupling = xx_coupling(g);
        } else {
            c.coupling = ComplexMatrix(d, d);
        }
        return c;
    }
    if (kind == "explicit") {
        reject_unknown(j, path, {"kind", "hamiltonian"});
        return ExplicitSpec{read_hermitian(field(j, path, "hamiltonian"), path + "/hamiltonian")};
    }
    malformed(path + "/kind", "unknown system kind \"" + kind + "\" (spin-half, lattice, composite, explicit)");
}

Json write_system(const SystemSpec& s) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SpinHalfSpec>) {
                return Json{{"kind", "spin-half"}, {"delta", v.delta}, {"omega", v.omega}};
            } else if constexpr (std::is_same_v<T, LatticeSpec>) {
                return Json{{"kind", "lattice"}, {"sites", v.sites}, {"length", v.length}, {"mass", v.mass}};
            } else if constexpr (std::is_same_v<T, CompositeSpec>) {
                return Json{{"kind", "composite"},
                            {"a", Json{{"hamiltonian", write_matrix(v.h1)}}},
                            {"b", Json{{"hamiltonian", write_matrix(v.h2)}}},
                            {"coupling", write_matrix(v.coupling)}};
            } else {
                return Json{{"kind", "explicit"}, {"hamiltonian", write_matrix(v.hamiltonian)}};
            }
        },
        s);
}

// ---- resolution ------------------------------------------------------------

struct Factors {
    std::size_t a;
    std::size_t b;
};

std::optional<Factors> factors_of(const ScenarioSpec& spec) {
    if (const auto* c = std::get_if<CompositeSpec>(&spec.system)) return Factors{c->h1.rows(), c->h2.rows()};
    return std::nullopt;
}

const LatticeSpec* lattice_of(const ScenarioSpec& spec) { return std::get_if<LatticeSpec>(&spec.system); }

LatticeFreeParticle lattice_system(const LatticeSpec& s) { return LatticeFreeParticle(s.sites, s.length, s.mass); }

/// alpha, beta, index:i in dimension dim.
std::optional<PureState> simple_state(const std::string& label, std::size_t dim) {
    if ((label == "alpha" || label == "beta") && dim == 2)
        return PureState::basis_vector(2, label == "alpha" ? 0 : 1);
    if (label.rfind("index:", 0) == 0) {
        std::string rest = label.substr(6);
        std::size_t used = 0;
        unsigned long i = 0;
        try {
            i = std::stoul(rest, &used);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        if (used != rest.size() || rest.empty() || rest[0] == '-' || rest[0] == '+' || i >= dim) return std::nullopt;
        return PureState::basis_vector(dim, i);
    }
    return std::nullopt;
}

std::optional<long> parse_integer(const std::string& s) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != s.size() || s.empty() || s[0] == '+') return std::nullopt;
    return v;
}

PureState named_state(const ScenarioSpec& spec, std::size_t dim, const std::string& label) {
    const std::string path = "/initial/state";
    if (auto f = factors_of(spec)) {
        auto comma = label.find(',');
        if (comma != std::string::npos) {
            auto a = simple_state(label.substr(0, comma), f->a);
            auto b = simple_state(label.substr(comma + 1), f->b);
            if (!a || !b) invalid(path, "cannot resolve product state \"" + label + "\"");
            ComplexVector v;
            for (Complex x : a->amplitudes())
                for (Complex y : b->amplitudes()) v.push_back(x * y);
            return PureState(std::move(v));
        }
    }
    if (const LatticeSpec* lat = lattice_of(spec)) {
        if (label.rfind("site:", 0) == 0) {
            auto s = parse_integer(label.substr(5));
            if (!s || *s < 0 || static_cast<std::size_t>(*s) >= lat->sites)
                invalid(path, "no lattice site \"" + label.substr(5) + "\"");
            return PureState::basis_vector(lat->sites, static_cast<std::size_t>(*s));
        }
        if (label.rfind("momentum:", 0) == 0) {
            auto k = parse_integer(label.substr(9));
            LatticeFreeParticle sys = lattice_system(*lat);
            std::vector<int> labels = sys.momentum_labels();
            auto it = k ? std::find(labels.begin(), labels.end(), *k) : labels.end();
            if (it == labels.end()) invalid(path, "no momentum label \"" + label.substr(9) + "\"");
            return lattice_momentum_basis(sys)[static_cast<std::size_t>(it - labels.begin())];
        }
    }
    if (auto s = simple_state(label, dim)) return *s;
    invalid(path, "unknown state \"" + label + "\" for this system");
}

InitialSpec read_initial(const Json& j, const std::string& path) {
    expect_object(j, path);
    int forms = j.contains("state") + j.contains("amplitudes") + j.contains("probabilities");
    if (forms != 1) malformed(path, "give exactly one of \"state\", \"amplitudes\", \"probabilities\"");
    if (j.contains("state")) {
        reject_unknown(j, path, {"state"});
        return NamedState{read_string(j["state"], path + "/state")};
    }
    if (j.contains("amplitudes")) {
        reject_unknown(j, path, {"amplitudes"});
        return AmplitudeState{read_vector(j["amplitudes"], path + "/amplitudes")};
    }
    reject_unknown(j, path, {"probabilities", "basis"});
    MixtureState m{read_reals(j["probabilities"], path + "/probabilities"), BasisKind::Natural};
    if (j.contains("basis")) m.basis = read_basis(j["basis"], path + "/basis");
    return m;
}

Json write_initial(const InitialSpec& s) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NamedState>) {
                return Json{{"state", v.label}};
            } else if constexpr (std::is_same_v<T, AmplitudeState>) {
                return Json{{"amplitudes", write_vector(v.amplitudes)}};
            } else {
                return Json{{"probabilities", v.weights}, {"basis", basis_name(v.basis)}};
            }
        },
        s);
}

TimeGrid read_time(const Json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"start", "stop", "steps"});
    TimeGrid g{read_number(field(j, path, "start"), path + "/start"), read_number(field(j, path, "stop"), path + "/stop"),
               read_count(field(j, path, "steps"), path + "/steps")};
    if (g.stop < g.start) invalid(path + "/stop", "must not precede start");
    if (g.steps > kMaxTimeSteps) invalid(path + "/steps", "exceeds " + std::to_string(kMaxTimeSteps));
    if (g.steps == 0 && g.stop != g.start) invalid(path + "/steps", "zero steps requires stop == start");
    return g;
}

const std::vector<std::string_view> kNamedObservables = {
    "sigma_x",   "sigma_y",   "sigma_z",   "sigma_x_a",   "sigma_y_a",           "sigma_z_a",
    "sigma_x_b", "sigma_y_b", "sigma_z_b", "energy",      "populations",         "site_populations",
    "momentum_populations",   "subsystem_entropy_a",      "subsystem_entropy_b",
};

std::vector<ObservableSpec> read_observables(const Json& j, const std::string& path) {
    if (!j.is_array()) malformed(path, "expected an array");
    std::vector<ObservableSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string p = path + "/" + std::to_string(i);
        if (j[i].is_string()) {
            std::string name = j[i].get<std::string>();
            if (std::find(kNamedObservables.begin(), kNamedObservables.end(), name) == kNamedObservables.end())
                malformed(p, "unknown observable \"" + name + "\"");
            out.push_back({name, std::nullopt});
        } else if (j[i].is_object()) {
            reject_unknown(j[i], p, {"name", "matrix"});
            std::string name = read_string(field(j[i], p, "name"), p + "/name");
            out.push_back({name, read_hermitian(field(j[i], p, "matrix"), p + "/matrix")});
        } else {
            malformed(p, "expected an observable name or {\"name\", \"matrix\"}");
        }
    }
    return out;
}

std::optional<TransitionSpec> read_transitions(const Json& j, const std::string& path) {
    expect_object(j, path);
    reject_unknown(j, path, {"basis", "pairs"});
    TransitionSpec t;
    if (j.contains("basis")) t.basis = read_basis(j["basis"], path + "/basis");
    const Json& pairs = field(j, path, "pairs");
    if (!pairs.is_array()) malformed(path + "/pairs", "expected an array of [from, to] pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::string p = path + "/pairs/" + std::to_string(i);
        if (!pairs[i].is_array() || pairs[i].size() != 2) malformed(p, "expected a [from, to] pair");
        t.pairs.emplace_back(read_count(pairs[i][0], p + "/0"), read_count(pairs[i][1], p + "/1"));
    }
    return t;
}

bool has_control_chars(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x20; });
}

std::size_t dimension_of(const ScenarioSpec& spec) {
    return std::visit(
        [](const auto& v) -> std::size_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SpinHalfSpec>) return 2;
            else if constexpr (std::is_same_v<T, LatticeSpec>) return v.sites;
            else if constexpr (std::is_same_v<T, CompositeSpec>) return v.h1.rows() * v.h2.rows();
            else return v.hamiltonian.rows();
        },
        spec.system);
}

bool is_sigma(const std::string& n) { return n.rfind("sigma_", 0) == 0; }

/// Column names contributed by one observable.
std::vector<std::string> observable_columns(const ScenarioSpec& spec, const ObservableSpec& o) {
    const std::size_t dim = dimension_of(spec);
    if (o.matrix) return {o.name};
    if (o.name == "populations") {
        if (std::holds_alternative<SpinHalfSpec>(spec.system)) return {"pAlpha", "pBeta"};
        std::vector<std::string> cols;
        for (std::size_t i = 0; i < dim; ++i) cols.push_back("p" + std::to_string(i));
        return cols;
    }
    if (o.name == "site_populations") {
        std::vector<std::string> cols;
        for (std::size_t i = 0; i < dim; ++i) cols.push_back("pSite" + std::to_string(i));
        return cols;
    }
    if (o.name == "momentum_populations") {
        std::vector<std::string> cols;
        for (int k : lattice_system(*lattice_of(spec)).momentum_labels())
            cols.push_back("pMom(" + std::to_string(k) + ")");
        return cols;
    }
    if (o.name == "subsystem_entropy_a") return {"S_A"};
    if (o.name == "subsystem_entropy_b") return {"S_B"};
    return {o.name};
}

void validate_observable(const ScenarioSpec& spec, const ObservableSpec& o, const std::string& path) {
    const std::size_t dim = dimension_of(spec);
    auto f = factors_of(spec);
    if (o.matrix) {
        if (o.name.empty() || has_control_chars(o.name) || o.name.find_first_of(",\"") != std::string::npos)
            invalid(path + "/name", "observable names must be non-empty without commas, quotes or control characters");
        if (o.matrix->rows() != dim)
            invalid(path + "/matrix", "expected " + std::to_string(dim) + "x" + std::to_string(dim));
        return;
    }
    const std::string& n = o.name;
    if (is_sigma(n) && n.size() == 7) {
        if (dim != 2) invalid(path, n + " needs a two-level system");
    } else if (is_sigma(n)) {
        if (!f) invalid(path, n + " needs a composite system");
        if ((n.back() == 'a' ? f->a : f->b) != 2) invalid(path, n + " needs a spin-1/2 factor");
    } else if (n == "site_populations" || n == "momentum_populations") {
        if (!lattice_of(spec)) invalid(path, n + " needs a lattice system");
    } else if (n == "subsystem_entropy_a" || n == "subsystem_entropy_b") {
        if (!f) invalid(path, n + " needs a composite system");
    }
}

/// Everything run_scenario needs, built once.
struct Resolved {
    HamiltonianOperator h;
    DensityMatrix rho0;
    std::size_t dim;
};

ComplexMatrix sigma_of(char axis) {
    PauliMatrices p = pauli();
    return axis == 'x' ? p.x : axis == 'y' ? p.y : p.z;
}

ComplexMatrix observable_matrix(const ScenarioSpec& spec, const ObservableSpec& o, const HamiltonianOperator& h) {
    if (o.matrix) return *o.matrix;
    if (o.name == "energy") return h.matrix();
    const char axis = o.name[6];
    if (o.name.size() == 7) return sigma_of(axis);
    auto f = factors_of(spec);
    if (o.name.back() == 'a') return kron(sigma_of(axis), ComplexMatrix::identity(f->b));
    return kron(ComplexMatrix::identity(f->a), sigma_of(axis));
}

void validate_spec(const ScenarioSpec& spec) {
    if (has_control_chars(spec.name)) invalid("/name", "contains control characters");
    HamiltonianOperator h = [&] {
        try {
            return scenario_hamiltonian(spec);
        } catch (const std::invalid_argument& e) {
            invalid("/system", e.what());
        } catch (const std::domain_error& e) {
            invalid("/system", e.what());
        }
    }();
    try {
        (void)scenario_initial_state(spec);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        invalid("/initial", e.what());
    }
    std::vector<std::string> seen = {"t", "entropy"};
    for (std::size_t i = 0; i < spec.observables.size(); ++i) {
        std::string path = "/observables/" + std::to_string(i);
        validate_observable(spec, spec.observables[i], path);
        for (const std::string& c : observable_columns(spec, spec.observables[i])) {
            if (std::find(seen.begin(), seen.end(), c) != seen.end()) invalid(path, "duplicate column \"" + c + "\"");
            seen.push_back(c);
        }
    }
    if (spec.transitions) {
        const TransitionSpec& t = *spec.transitions;
        if (t.basis == BasisKind::Momentum && !lattice_of(spec))
            invalid("/transitions/basis", "momentum basis needs a lattice system");
        for (std::size_t i = 0; i < t.pairs.size(); ++i) {
            if (t.pairs[i].first >= h.dim() || t.pairs[i].second >= h.dim())
                invalid("/transitions/pairs/" + std::to_string(i), "index out of range for dimension " + std::to_string(h.dim()));
        }
    }
}

std::string pair_label(const std::pair<std::size_t, std::size_t>& p) {
    return std::to_string(p.first) + "->" + std::to_string(p.second);
}

double transition(const OrthonormalBasis& b, std::size_t j, std::size_t k, const ComplexMatrix& u) {
    Complex a = inner(b[k].amplitudes(), apply(u, b[j].amplitudes()));
    return std::norm(a);
}

}  // namespace

double TimeGrid::at(std::size_t i) const noexcept {
    if (steps == 0 || i == 0) return start;
    if (i == steps) return stop;
    return start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps);
}

bool EvolutionReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

// ---- parse / serialize -----------------------------------------------------

ScenarioSpec parse_scenario(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed scenario document: ") + e.what());
    }
    expect_object(doc, "");
    reject_unknown(doc, "", {"format", "name", "system", "initial", "time", "observables", "transitions"});
    if (doc.contains("format")) {
        std::string f = read_string(doc["format"], "/format");
        if (f != kScenarioFormat) malformed("/format", "unsupported format \"" + f + "\", expected " + kScenarioFormat);
    }
    ScenarioSpec spec;
    spec.name = doc.contains("name") ? read_string(doc["name"], "/name") : std::string();
    spec.system = read_system(field(doc, "", "system"), "/system");
    spec.initial = read_initial(field(doc, "", "initial"), "/initial");
    spec.time = read_time(field(doc, "", "time"), "/time");
    if (doc.contains("observables")) spec.observables = read_observables(doc["observables"], "/observables");
    if (doc.contains("transitions")) spec.transitions = read_transitions(doc["transitions"], "/transitions");
    validate_spec(spec);
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
    Json doc{{"format", kScenarioFormat}, {"name", spec.name}};
    doc["system"] = write_system(spec.system);
    doc["initial"] = write_initial(spec.initial);
    doc["time"] = Json{{"start", spec.time.start}, {"stop", spec.time.stop}, {"steps", spec.time.steps}};
    Json obs = Json::array();
    for (const ObservableSpec& o : spec.observables) {
        if (o.matrix)
            obs.push_back(Json{{"name", o.name}, {"matrix", write_matrix(*o.matrix)}});
        else
            obs.push_back(o.name);
    }
    doc["observables"] = std::move(obs);
    if (spec.transitions) {
        Json pairs = Json::array();
        for (const auto& [j, k] : spec.transitions->pairs) pairs.push_back(Json::array({j, k}));
        doc["transitions"] = Json{{"basis", basis_name(spec.transitions->basis)}, {"pairs", std::move(pairs)}};
    }
    return doc.dump(2) + "\n";
}

// ---- resolution ------------------------------------------------------------

HamiltonianOperator scenario_hamiltonian(const ScenarioSpec& spec) {
    return std::visit(
        [](const auto& v) -> HamiltonianOperator {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SpinHalfSpec>) {
                return spin_hamiltonian({v.delta, v.omega});
            } else if constexpr (std::is_same_v<T, LatticeSpec>) {
                return lattice_hamiltonian(lattice_system(v));
            } else if constexpr (std::is_same_v<T, CompositeSpec>) {
                return composite_hamiltonian(
                    CompositeSystem(HamiltonianOperator(v.h1), HamiltonianOperator(v.h2), v.coupling));
            } else {
                return HamiltonianOperator(v.hamiltonian);
            }
        },
        spec.system);
}

OrthonormalBasis scenario_basis(const ScenarioSpec& spec, BasisKind kind) {
    switch (kind) {
        case BasisKind::Natural: return OrthonormalBasis::standard(dimension_of(spec));
        case BasisKind::Momentum: {
            const LatticeSpec* lat = lattice_of(spec);
            if (!lat) throw ValidationError("momentum basis needs a lattice system");
            return lattice_momentum_basis(lattice_system(*lat));
        }
        case BasisKind::Energy: return OrthonormalBasis::eigenbasis(scenario_hamiltonian(spec).matrix());
    }
    throw ValidationError("unknown basis");
}

DensityMatrix scenario_initial_state(const ScenarioSpec& spec) {
    const std::size_t dim = dimension_of(spec);
    if (const auto* n = std::get_if<NamedState>(&spec.initial)) return pure_density(named_state(spec, dim, n->label));
    if (const auto* a = std::get_if<AmplitudeState>(&spec.initial)) {
        if (a->amplitudes.size() != dim)
            invalid("/initial/amplitudes", "expected " + std::to_string(dim) + " amplitudes, got " +
                                               std::to_string(a->amplitudes.size()));
        try {
            return pure_density(PureState(a->amplitudes));
        } catch (const DomainError& e) {
            invalid("/initial/amplitudes", e.what());
        }
    }
    const auto& m = std::get<MixtureState>(spec.initial);
    if (m.weights.size() != dim)
        invalid("/initial/probabilities",
                "expected " + std::to_string(dim) + " probabilities, got " + std::to_string(m.weights.size()));
    std::optional<ProbabilityVector> p;
    try {
        p.emplace(m.weights);
    } catch (const DomainError& e) {
        invalid("/initial/probabilities", e.what());
    }
    if (m.basis == BasisKind::Momentum && !lattice_of(spec))
        invalid("/initial/basis", "momentum basis needs a lattice system");
    return mixture_density(scenario_basis(spec, m.basis), *p);
}

// ---- runs ------------------------------------------------------------------

EvolutionReport run_scenario(const ScenarioSpec& spec) {
    const HamiltonianOperator h = scenario_hamiltonian(spec);
    const DensityMatrix rho0 = scenario_initial_state(spec);
    const std::size_t dim = h.dim();
    const auto factors = factors_of(spec);

    EvolutionReport report;
    report.command = "evolve";
    report.columns.push_back("entropy");

    // Per-column evaluators, in column order.
    std::vector<ComplexMatrix> expectation_ops;
    struct Probe {
        enum Kind { Expectation, Diagonal, Momentum, EntropyA, EntropyB } kind;
        std::size_t index;
    };
    std::vector<Probe> probes;
    std::optional<OrthonormalBasis> momentum;
    if (const LatticeSpec* lat = lattice_of(spec)) momentum = lattice_momentum_basis(lattice_system(*lat));

    for (const ObservableSpec& o : spec.observables) {
        for (const std::string& c : observable_columns(spec, o)) report.columns.push_back(c);
        if (o.name == "populations" && !o.matrix) {
            for (std::size_t i = 0; i < dim; ++i) probes.push_back({Probe::Diagonal, i});
        } else if (o.name == "site_populations" && !o.matrix) {
            for (std::size_t i = 0; i < dim; ++i) probes.push_back({Probe::Diagonal, i});
        } else if (o.name == "momentum_populations" && !o.matrix) {
            for (std::size_t i = 0; i < dim; ++i) probes.push_back({Probe::Momentum, i});
        } else if (o.name == "subsystem_entropy_a" && !o.matrix) {
            probes.push_back({Probe::EntropyA, 0});
        } else if (o.name == "subsystem_entropy_b" && !o.matrix) {
            probes.push_back({Probe::EntropyB, 0});
        } else {
            probes.push_back({Probe::Expectation, expectation_ops.size()});
            expectation_ops.push_back(observable_matrix(spec, o, h));
        }
    }
    std::optional<OrthonormalBasis> tbasis;
    if (spec.transitions) {
        tbasis = scenario_basis(spec, spec.transitions->basis);
        for (const auto& p : spec.transitions->pairs) report.columns.push_back("P(" + pair_label(p) + ")");
    }

    const TimeEvolution evolution(h);
    double s0 = 0.0;
    double entropy_drift = 0.0;
    double trace_drift = 0.0;
    double unitarity = 0.0;
    for (std::size_t i = 0; i < spec.time.points(); ++i) {
        const double t = spec.time.at(i);
        const Propagator u = evolution.at(t);
        unitarity = std::max(unitarity, unitarity_residual(u.matrix()));
        ComplexMatrix m = u.matrix() * rho0.matrix() * adjoint(u.matrix());
        trace_drift = std::max(trace_drift, std::abs(trace(m) - Complex(1.0)));
        const DensityMatrix rho(std::move(m));

        EvolutionRecord rec;
        rec.t = t;
        const double s = von_neumann_entropy(rho);
        if (i == 0) s0 = s;
        entropy_drift = std::max(entropy_drift, std::abs(s - s0));
        rec.values.push_back(s);
        for (const Probe& p : probes) {
            switch (p.kind) {
                case Probe::Expectation: rec.values.push_back(expectation(expectation_ops[p.index], rho)); break;
                case Probe::Diagonal: rec.values.push_back(rho.matrix()(p.index, p.index).real()); break;
                case Probe::Momentum: {
                    auto v = (*momentum)[p.index].amplitudes();
                    rec.values.push_back(inner(v, apply(rho.matrix(), v)).real());
                    break;
                }
                case Probe::EntropyA:
                    rec.values.push_back(von_neumann_entropy(reduced_density(rho, factors->a, factors->b, Subsystem::A)));
                    break;
                case Probe::EntropyB:
                    rec.values.push_back(von_neumann_entropy(reduced_density(rho, factors->a, factors->b, Subsystem::B)));
                    break;
            }
        }
        if (spec.transitions) {
            for (const auto& [j, k] : spec.transitions->pairs) rec.values.push_back(transition(*tbasis, j, k, u.matrix()));
        }
        report.records.push_back(std::move(rec));
    }

    const double unitarity_tol = 1e-9 * static_cast<double>(dim);
    report.checks.push_back({"entropy_constant", entropy_drift, kEntropyDriftTolerance,
                             entropy_drift <= kEntropyDriftTolerance});
    report.checks.push_back({"trace_preserved", trace_drift, tolerance::kDensityTrace,
                             trace_drift <= tolerance::kDensityTrace});
    report.checks.push_back({"propagator_unitary", unitarity, unitarity_tol, unitarity <= unitarity_tol});
    return report;
}

EvolutionReport run_perturbation(const ScenarioSpec& spec) {
    if (!spec.transitions || spec.transitions->pairs.empty())
        throw ValidationError("/transitions: perturb needs at least one [from, to] pair");
    for (std::size_t i = 0; i < spec.transitions->pairs.size(); ++i) {
        if (spec.transitions->pairs[i].first == spec.transitions->pairs[i].second)
            throw ValidationError("/transitions/pairs/" + std::to_string(i) + ": first-order formula needs from != to");
    }
    const HamiltonianOperator h = scenario_hamiltonian(spec);
    const OrthonormalBasis basis = scenario_basis(spec, spec.transitions->basis);
    const double hnorm = frobenius_norm(h.matrix());

    EvolutionReport report;
    report.command = "perturb";
    for (const auto& p : spec.transitions->pairs) {
        std::string l = pair_label(p);
        report.columns.push_back("P_exact(" + l + ")");
        report.columns.push_back("P_first(" + l + ")");
        report.columns.push_back("ratio(" + l + ")");
    }

    const TimeEvolution evolution(h);
    double window_dev = 0.0;
    bool window_hit = false;
    for (std::size_t i = 0; i < spec.time.points(); ++i) {
        const double t = spec.time.at(i);
        const Propagator u = evolution.at(t);
        EvolutionRecord rec;
        rec.t = t;
        for (const auto& [j, k] : spec.transitions->pairs) {
            const double exact = transition(basis, j, k, u.matrix());
            const double first = transition_probability_first_order(basis, j, k, h, t);
            const double ratio = first > 0.0 ? exact / first : std::nan("");
            rec.values.insert(rec.values.end(), {exact, first, ratio});
            if (first > 0.0 && t * hnorm <= kFirstOrderWindow) {
                window_hit = true;
                window_dev = std::max(window_dev, std::abs(ratio - 1.0));
            }
        }
        report.records.push_back(std::move(rec));
    }
    if (window_hit)
        report.checks.push_back({"first_order_ratio_in_window", window_dev, kFirstOrderRatioTolerance,
                                 window_dev <= kFirstOrderRatioTolerance});
    return report;
}

// ---- output ----------------------------------------------------------------

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

void write_csv(const EvolutionReport& report, const ScenarioSpec& spec, std::ostream& out) {
    out << "# qdyn " << kVersion << " " << report.command << " format=" << kScenarioFormat << " scenario=\""
        << spec.name << "\"\n";
    out << "t";
    for (const std::string& c : report.columns) out << ',' << c;
    out << '\n';
    for (const EvolutionRecord& r : report.records) {
        out << format_number(r.t);
        for (double v : r.values) out << ',' << format_number(v);
        out << '\n';
    }
}

void write_summary(const EvolutionReport& report, const ScenarioSpec& spec, std::ostream& out) {
    Json doc{{"qdyn_version", kVersion}, {"command", report.command}};
    doc["scenario"] = Json::parse(serialize_scenario(spec));
    doc["points"] = report.records.size();
    doc["columns"] = report.columns;
    doc["tolerances"] = Json{{"entropy_constant", kEntropyDriftTolerance},
                             {"probability_sum", tolerance::kProbabilitySum},
                             {"state_norm", tolerance::kStateNorm},
                             {"hermiticity_relative", kHermitianTolerance},
                             {"trace", tolerance::kDensityTrace},
                             {"unitarity_per_dim", 1e-9},
                             {"first_order_window", kFirstOrderWindow},
                             {"first_order_ratio", kFirstOrderRatioTolerance}};
    Json checks = Json::array();
    for (const InvariantCheck& c : report.checks)
        checks.push_back(Json{{"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    doc["checks"] = std::move(checks);
    doc["passed"] = report.passed();
    out << doc.dump(2) << '\n';
}

}  // namespace qdyn
