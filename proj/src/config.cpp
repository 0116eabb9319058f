#include "hedgeratio/config.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/serialize.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

namespace hr {
namespace {

void check_keys(const Json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in '" + section + "'");
    }
}

const Json& required(const Json& obj, const char* key, const std::string& section) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("missing key '" + std::string(key) + "' in '" + section + "'");
    return *it;
}

double get_number(const Json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError("'" + what + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + what + "' must be finite");
    return x;
}

std::uint64_t get_unsigned(const Json& v, const std::string& what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("'" + what + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

bool get_bool(const Json& v, const std::string& what) {
    if (!v.is_boolean()) throw ConfigError("'" + what + "' must be true or false");
    return v.get<bool>();
}

std::string get_string(const Json& v, const std::string& what) {
    if (!v.is_string()) throw ConfigError("'" + what + "' must be a string");
    return v.get<std::string>();
}

template <class F>
void optional_key(const Json& obj, const char* key, F&& read) {
    if (const auto it = obj.find(key); it != obj.end()) read(*it);
}

GbmModel parse_model(const Json& j) {
    check_keys(j, "model", {"spot", "rate", "volatility", "horizon", "observation_time", "steps", "paths", "seed"});
    GbmModel m;
    m.spot = get_number(required(j, "spot", "model"), "model.spot");
    optional_key(j, "rate", [&](const Json& v) { m.rate = get_number(v, "model.rate"); });
    m.volatility = get_number(required(j, "volatility", "model"), "model.volatility");
    m.horizon = get_number(required(j, "horizon", "model"), "model.horizon");
    optional_key(j, "observation_time", [&](const Json& v) { m.observation_time = get_number(v, "model.observation_time"); });
    optional_key(j, "steps", [&](const Json& v) { m.steps = get_unsigned(v, "model.steps"); });
    m.paths = get_unsigned(required(j, "paths", "model"), "model.paths");
    m.seed = get_unsigned(required(j, "seed", "model"), "model.seed");
    m.validate();
    return m;
}

ProductSpec parse_product(const Json& j, const GbmModel& model) {
    check_keys(j, "product", {"kind", "strike", "maturity"});
    ProductSpec p;
    const std::string kind = get_string(required(j, "kind", "product"), "product.kind");
    if (kind == "forward") {
        p.kind = PayoffKind::forward;
    } else if (kind == "european-call") {
        p.kind = PayoffKind::european_call;
    } else {
        throw ConfigError("unknown product kind '" + kind + "'");
    }
    p.strike = get_number(required(j, "strike", "product"), "product.strike");
    p.maturity = model.horizon;
    optional_key(j, "maturity", [&](const Json& v) { p.maturity = get_number(v, "product.maturity"); });
    p.validate(model);
    return p;
}

InstrumentSpec parse_instrument(const Json& j) {
    check_keys(j, "instruments[]", {"kind", "scale"});
    InstrumentSpec s;
    const std::string kind = get_string(required(j, "kind", "instruments[]"), "instruments[].kind");
    if (kind == "stock") {
        s.kind = InstrumentKind::stock;
    } else if (kind == "bond") {
        s.kind = InstrumentKind::bond;
    } else {
        throw ConfigError("unknown instrument kind '" + kind + "'");
    }
    optional_key(j, "scale", [&](const Json& v) { s.scale = get_number(v, "instruments[].scale"); });
    if (s.scale == 0.0) throw ConfigError("instrument scale must be nonzero");
    return s;
}

feature::Monomial parse_monomial(const Json& j) {
    check_keys(j, "monomial", {"type", "variable", "degree", "center", "scale"});
    feature::Monomial m;
    m.variable = get_string(required(j, "variable", "monomial"), "monomial.variable");
    optional_key(j, "degree", [&](const Json& v) {
        if (!v.is_number_integer()) throw ConfigError("'monomial.degree' must be an integer");
        m.degree = v.get<int>();
    });
    optional_key(j, "center", [&](const Json& v) { m.center = get_number(v, "monomial.center"); });
    optional_key(j, "scale", [&](const Json& v) { m.scale = get_number(v, "monomial.scale"); });
    return m;
}

Feature parse_feature(const Json& j) {
    if (!j.is_object()) throw ConfigError("basis features must be objects");
    const std::string type = get_string(required(j, "type", "feature"), "feature.type");
    if (type == "constant") {
        check_keys(j, "constant", {"type"});
        return feature::Constant{};
    }
    if (type == "monomial") return parse_monomial(j);
    if (type == "product") {
        check_keys(j, "product feature", {"type", "factors"});
        const Json& factors = required(j, "factors", "product feature");
        if (!factors.is_array() || factors.empty()) throw ConfigError("product feature needs a nonempty 'factors' list");
        feature::Product p;
        for (const auto& f : factors) p.factors.push_back(parse_monomial(f));
        return p;
    }
    if (type == "indicator") {
        check_keys(j, "indicator", {"type", "variable", "threshold", "above"});
        feature::Indicator ind;
        ind.variable = get_string(required(j, "variable", "indicator"), "indicator.variable");
        ind.threshold = get_number(required(j, "threshold", "indicator"), "indicator.threshold");
        optional_key(j, "above", [&](const Json& v) { ind.above = get_bool(v, "indicator.above"); });
        return ind;
    }
    throw ConfigError("unknown feature type '" + type + "'");
}

BasisConfig parse_basis_config(const Json& j, const std::string& section) {
    check_keys(j, section, {"features", "measurability", "drop_tol", "orthonormalize"});
    BasisConfig c;
    c.spec = basis_spec_from_json(j);
    optional_key(j, "drop_tol", [&](const Json& v) { c.drop_tol = get_number(v, section + ".drop_tol"); });
    optional_key(j, "orthonormalize", [&](const Json& v) { c.orthonormalize = get_bool(v, section + ".orthonormalize"); });
    if (c.drop_tol < 0.0) throw ConfigError(section + ".drop_tol must be nonnegative");
    return c;
}

RegularizationConfig parse_regularization(const Json& j) {
    check_keys(j, "regularization", {"lambda", "lambda_grid", "L", "z0"});
    RegularizationConfig r;
    optional_key(j, "lambda", [&](const Json& v) { r.lambda = get_number(v, "regularization.lambda"); });
    if (r.lambda < 0.0) throw ConfigError("regularization.lambda must be nonnegative");
    optional_key(j, "lambda_grid", [&](const Json& v) {
        if (!v.is_array()) throw ConfigError("regularization.lambda_grid must be a list");
        for (const auto& x : v) r.lambda_grid.push_back(get_number(x, "regularization.lambda_grid[]"));
    });
    for (std::size_t k = 0; k < r.lambda_grid.size(); ++k) {
        if (r.lambda_grid[k] < 0.0) throw ConfigError("regularization.lambda_grid values must be nonnegative");
        if (k > 0 && !(r.lambda_grid[k] > r.lambda_grid[k - 1])) {
            throw ConfigError("regularization.lambda_grid must be strictly ascending");
        }
    }
    optional_key(j, "L", [&](const Json& v) {
        if (v.is_string() && v.get<std::string>() == "identity") return;
        r.l = matrix_from_json(v, "regularization.L");
    });
    optional_key(j, "z0", [&](const Json& v) { r.z0 = vector_from_json(v, "regularization.z0"); });
    return r;
}

SolverConfig parse_solver(const Json& j) {
    check_keys(j, "solver", {"rcond", "explicit_max_unknowns", "least_squares_fallback", "tolerance", "max_iterations"});
    SolverConfig s;
    optional_key(j, "rcond", [&](const Json& v) { s.rcond = get_number(v, "solver.rcond"); });
    optional_key(j, "explicit_max_unknowns",
                 [&](const Json& v) { s.explicit_max_unknowns = get_unsigned(v, "solver.explicit_max_unknowns"); });
    optional_key(j, "least_squares_fallback",
                 [&](const Json& v) { s.least_squares_fallback = get_bool(v, "solver.least_squares_fallback"); });
    optional_key(j, "tolerance", [&](const Json& v) { s.tolerance = get_number(v, "solver.tolerance"); });
    optional_key(j, "max_iterations", [&](const Json& v) { s.max_iterations = get_unsigned(v, "solver.max_iterations"); });
    if (!(s.rcond > 0.0 && s.rcond < 1.0)) throw ConfigError("solver.rcond must lie in (0, 1)");
    if (!(s.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
    return s;
}

OutputConfig parse_output(const Json& j) {
    check_keys(j, "output", {"result", "hedge_csv", "residual_csv", "states_csv"});
    OutputConfig o;
    optional_key(j, "result", [&](const Json& v) { o.result = get_string(v, "output.result"); });
    optional_key(j, "hedge_csv", [&](const Json& v) { o.hedge_csv = get_string(v, "output.hedge_csv"); });
    optional_key(j, "residual_csv", [&](const Json& v) { o.residual_csv = get_string(v, "output.residual_csv"); });
    optional_key(j, "states_csv", [&](const Json& v) { o.states_csv = get_string(v, "output.states_csv"); });
    return o;
}

void check_variables(const BasisSpec& spec, const std::string& section) {
    static const std::set<std::string> known{state::kSpotObs, state::kSpotMat, state::kDiscount};
    for (const auto& name : spec.variables()) {
        if (!known.count(name)) throw ConfigError(section + " references unknown state variable '" + name + "'");
    }
}

}  // namespace

std::string_view to_string(Formulation f) noexcept {
    switch (f) {
        case Formulation::ls: return "ls";
        case Formulation::projected: return "projected";
        case Formulation::both: return "both";
        case Formulation::compare: return "compare";
    }
    return "?";
}

RegularizationSpec RegularizationConfig::spec(double lambda_value) const {
    RegularizationSpec r;
    r.lambda = lambda_value;
    r.l = l;
    r.z0 = z0;
    return r;
}

SolveOptions SolverConfig::options() const {
    SolveOptions o;
    o.rcond = rcond;
    o.least_squares_fallback = least_squares_fallback;
    o.tolerance = tolerance;
    o.max_iterations = max_iterations;
    return o;
}

ExperimentConfig parse_config(const Json& doc) {
    check_keys(doc, "config",
               {"model", "product", "primitives", "instruments", "solution_basis", "test_basis", "formulation",
                "regularization", "solver", "holdout_seed", "kink_band", "output", "deterministic", "threads"});
    ExperimentConfig c;
    c.source = doc;
    c.model = parse_model(required(doc, "model", "config"));
    c.product = parse_product(required(doc, "product", "config"), c.model);

    const Json& prims = required(doc, "primitives", "config");
    if (!prims.is_array() || prims.empty()) throw ConfigError("'primitives' must be a nonempty list");
    std::set<std::string> seen;
    for (const auto& p : prims) {
        std::string name = get_string(p, "primitives[]");
        if (name != primitive::kSpot && name != primitive::kDiscount) throw ConfigError("unknown primitive '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError("duplicate primitive '" + name + "'");
        c.primitives.push_back(std::move(name));
    }

    const Json& inst = required(doc, "instruments", "config");
    if (!inst.is_array() || inst.empty()) throw ConfigError("'instruments' must be a nonempty list");
    for (const auto& i : inst) {
        InstrumentSpec s = parse_instrument(i);
        const char* needs = s.kind == InstrumentKind::stock ? primitive::kSpot : primitive::kDiscount;
        if (!seen.count(needs)) {
            throw ConfigError("instrument '" + s.name() + "' depends on undeclared primitive '" + needs + "'");
        }
        c.instruments.push_back(s);
    }

    c.solution_basis = parse_basis_config(required(doc, "solution_basis", "config"), "solution_basis");
    check_variables(c.solution_basis.spec, "solution_basis");
    optional_key(doc, "test_basis", [&](const Json& v) {
        if (v.is_string()) {
            if (v.get<std::string>() != "galerkin") throw ConfigError("test_basis must be \"galerkin\" or a basis object");
            return;
        }
        c.test_basis = parse_basis_config(v, "test_basis");
        check_variables(c.test_basis->spec, "test_basis");
    });

    optional_key(doc, "formulation", [&](const Json& v) {
        const std::string f = get_string(v, "formulation");
        if (f == "ls") {
            c.formulation = Formulation::ls;
        } else if (f == "projected") {
            c.formulation = Formulation::projected;
        } else if (f == "both") {
            c.formulation = Formulation::both;
        } else if (f == "compare") {
            c.formulation = Formulation::compare;
        } else {
            throw ConfigError("unknown formulation '" + f + "'");
        }
    });
    if (c.formulation == Formulation::compare && !c.solution_basis.orthonormalize) {
        throw ConfigError("formulation 'compare' needs an orthonormalized solution basis");
    }

    optional_key(doc, "regularization", [&](const Json& v) { c.regularization = parse_regularization(v); });
    optional_key(doc, "solver", [&](const Json& v) { c.solver = parse_solver(v); });
    optional_key(doc, "holdout_seed", [&](const Json& v) { c.holdout_seed = get_unsigned(v, "holdout_seed"); });
    optional_key(doc, "kink_band", [&](const Json& v) { c.kink_band = get_number(v, "kink_band"); });
    if (c.kink_band < 0.0) throw ConfigError("kink_band must be nonnegative");
    optional_key(doc, "output", [&](const Json& v) { c.output = parse_output(v); });
    optional_key(doc, "deterministic", [&](const Json& v) { c.deterministic = get_bool(v, "deterministic"); });
    optional_key(doc, "threads", [&](const Json& v) { c.threads = get_unsigned(v, "threads"); });
    if (c.threads == 0) throw ConfigError("threads must be at least 1");
    return c;
}

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("cannot parse " + what + ": " + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(parse_json_text(io::read_text(path), path.string()));
}

Json to_json(const BasisSpec& spec) {
    Json features = Json::array();
    auto monomial = [](const feature::Monomial& m) {
        return Json{{"type", "monomial"}, {"variable", m.variable}, {"degree", m.degree}, {"center", m.center},
                    {"scale", m.scale}};
    };
    for (const auto& f : spec.features) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, feature::Constant>) {
                    features.push_back(Json{{"type", "constant"}});
                } else if constexpr (std::is_same_v<T, feature::Monomial>) {
                    features.push_back(monomial(v));
                } else if constexpr (std::is_same_v<T, feature::Product>) {
                    Json factors = Json::array();
                    for (const auto& m : v.factors) factors.push_back(monomial(m));
                    features.push_back(Json{{"type", "product"}, {"factors", factors}});
                } else {
                    features.push_back(
                        Json{{"type", "indicator"}, {"variable", v.variable}, {"threshold", v.threshold}, {"above", v.above}});
                }
            },
            f);
    }
    return Json{{"features", features}, {"measurability", spec.measurability_tag}};
}

BasisSpec basis_spec_from_json(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("basis must be an object");
    const Json& features = required(doc, "features", "basis");
    if (!features.is_array()) throw ConfigError("basis 'features' must be a list");
    BasisSpec spec;
    for (const auto& f : features) spec.features.push_back(parse_feature(f));
    optional_key(doc, "measurability", [&](const Json& v) { spec.measurability_tag = get_string(v, "basis.measurability"); });
    spec.validate();
    return spec;
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& doc, const std::string& what) {
    if (!doc.is_array() || doc.empty() || !doc.front().is_array()) throw ConfigError(what + " must be a list of rows");
    const std::size_t cols = doc.front().size();
    Matrix m(static_cast<Eigen::Index>(doc.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_array() || doc[i].size() != cols) throw ConfigError(what + " has ragged rows");
        for (std::size_t k = 0; k < cols; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = get_number(doc[i][k], what);
        }
    }
    return m;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const Json& doc, const std::string& what) {
    if (!doc.is_array()) throw ConfigError(what + " must be a list");
    Vector v(static_cast<Eigen::Index>(doc.size()));
    for (std::size_t i = 0; i < doc.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(doc[i], what);
    return v;
}

}  // namespace hr
