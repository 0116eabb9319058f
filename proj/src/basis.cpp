#include "hedgeratio/basis.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/hash.hpp"
#include "hedgeratio/simd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace hr {

std::size_t StateTable::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("state variable '" + name + "' is not available");
    return static_cast<std::size_t>(it - names.begin());
}

bool StateTable::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void validate_monomial(const feature::Monomial& f) {
    if (f.variable.empty()) throw ConfigError("monomial feature without a variable");
    if (f.degree < 0) throw ConfigError("monomial degree must be >= 0");
    if (!std::isfinite(f.center) || !std::isfinite(f.scale) || f.scale == 0.0) {
        throw ConfigError("monomial center/scale must be finite with nonzero scale");
    }
}

std::string canonical_monomial(const feature::Monomial& f) {
    return "mono(" + f.variable + "," + std::to_string(f.degree) + "," + number(f.center) + "," +
           number(f.scale) + ")";
}

double eval_monomial(const feature::Monomial& f, double x) {
    const double u = (x - f.center) / f.scale;
    double v = 1.0;
    for (int k = 0; k < f.degree; ++k) v *= u;
    return v;
}

std::string basis_identity(const char* kind, const std::optional<BasisSpec>& spec, const Matrix& z,
                           const Matrix* t) {
    ContentHash h;
    h.update(kind);
    if (spec) {
        h.update(spec->canonical());
    } else {
        h.update(static_cast<std::uint64_t>(z.rows()));
        h.update(static_cast<std::uint64_t>(z.cols()));
        h.update(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
    }
    if (t != nullptr) {
        h.update(static_cast<std::uint64_t>(t->rows()));
        h.update(static_cast<std::uint64_t>(t->cols()));
        h.update(std::span<const double>(t->data(), static_cast<std::size_t>(t->size())));
    }
    return std::string(kind) + "-" + h.hex();
}

}  // namespace

void BasisSpec::validate() const {
    if (features.empty()) throw ConfigError("basis spec has no features");
    for (const auto& f : features) {
        if (const auto* m = std::get_if<feature::Monomial>(&f)) validate_monomial(*m);
        if (const auto* p = std::get_if<feature::Product>(&f)) {
            if (p->factors.empty()) throw ConfigError("product feature without factors");
            for (const auto& m : p->factors) validate_monomial(m);
        }
        if (const auto* ind = std::get_if<feature::Indicator>(&f)) {
            if (ind->variable.empty()) throw ConfigError("indicator feature without a variable");
            if (!std::isfinite(ind->threshold)) throw ConfigError("indicator threshold must be finite");
        }
    }
}

std::string BasisSpec::canonical() const {
    std::string out = "basis[" + measurability_tag + "]";
    for (const auto& f : features) {
        out += ';';
        std::visit(
            [&out](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, feature::Constant>) {
                    out += "const";
                } else if constexpr (std::is_same_v<T, feature::Monomial>) {
                    out += canonical_monomial(v);
                } else if constexpr (std::is_same_v<T, feature::Product>) {
                    out += "prod(";
                    for (const auto& m : v.factors) out += canonical_monomial(m);
                    out += ")";
                } else {
                    out += "ind(" + v.variable + (v.above ? ",>," : ",<,") + number(v.threshold) + ")";
                }
            },
            f);
    }
    return out;
}

std::vector<std::string> BasisSpec::variables() const {
    std::set<std::string> seen;
    std::vector<std::string> out;
    auto add = [&](const std::string& v) {
        if (seen.insert(v).second) out.push_back(v);
    };
    for (const auto& f : features) {
        if (const auto* m = std::get_if<feature::Monomial>(&f)) add(m->variable);
        if (const auto* p = std::get_if<feature::Product>(&f)) {
            for (const auto& m : p->factors) add(m.variable);
        }
        if (const auto* ind = std::get_if<feature::Indicator>(&f)) add(ind->variable);
    }
    return out;
}

double empirical_inner(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw DimensionError("N", "inner product of vectors with lengths " + std::to_string(u.size()) + " and " +
                                      std::to_string(v.size()));
    }
    if (u.empty()) throw DimensionError("N", "inner product of empty vectors");
    return simd::active().dot(u.data(), v.data(), u.size()) / static_cast<double>(u.size());
}

Matrix evaluate_basis(const BasisSpec& spec, const StateTable& states) {
    spec.validate();
    const std::size_t n_paths = states.n_paths();
    const std::size_t r = spec.features.size();
    Matrix z(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(r));

    for (std::size_t q = 0; q < r; ++q) {
        const Feature& f = spec.features[q];
        const auto col = static_cast<Eigen::Index>(q);
        if (std::holds_alternative<feature::Constant>(f)) {
            z.col(col).setOnes();
        } else if (const auto* m = std::get_if<feature::Monomial>(&f)) {
            const auto c = static_cast<Eigen::Index>(states.column(m->variable));
            for (Eigen::Index l = 0; l < z.rows(); ++l) z(l, col) = eval_monomial(*m, states.values(l, c));
        } else if (const auto* p = std::get_if<feature::Product>(&f)) {
            std::vector<Eigen::Index> cols;
            for (const auto& fm : p->factors) cols.push_back(static_cast<Eigen::Index>(states.column(fm.variable)));
            for (Eigen::Index l = 0; l < z.rows(); ++l) {
                double v = 1.0;
                for (std::size_t k = 0; k < cols.size(); ++k) v *= eval_monomial(p->factors[k], states.values(l, cols[k]));
                z(l, col) = v;
            }
        } else {
            const auto& ind = std::get<feature::Indicator>(f);
            const auto c = static_cast<Eigen::Index>(states.column(ind.variable));
            for (Eigen::Index l = 0; l < z.rows(); ++l) {
                const double x = states.values(l, c);
                z(l, col) = (ind.above ? x > ind.threshold : x < ind.threshold) ? 1.0 : 0.0;
            }
        }
    }
    require_finite(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), "basis values");
    return z;
}

Matrix apply_transform(const Matrix& z, const Matrix& t) {
    if (z.cols() != t.rows()) {
        throw DimensionError("r", "raw basis has " + std::to_string(z.cols()) + " columns, transform has " +
                                      std::to_string(t.rows()) + " rows");
    }
    const auto r = static_cast<std::size_t>(t.rows());
    const auto rp = static_cast<std::size_t>(t.cols());
    const auto& k = simd::active();
    Matrix x = Matrix::Zero(z.rows(), t.cols());
    for (Eigen::Index l = 0; l < z.rows(); ++l) {
        double* out = x.data() + l * static_cast<Eigen::Index>(rp);
        const double* zl = z.data() + l * static_cast<Eigen::Index>(r);
        for (std::size_t q = 0; q < r; ++q) k.axpy(zl[q], t.data() + q * rp, out, rp);
    }
    return x;
}

BasisMatrix BasisSet::evaluate(const StateTable& states) const {
    if (!spec) throw ConfigError("basis set has no spec; it cannot be evaluated on new states");
    Matrix z = evaluate_basis(*spec, states);
    if (static_cast<std::size_t>(z.cols()) != raw_size()) {
        throw DimensionError("r", "spec yields " + std::to_string(z.cols()) + " features, transform expects " +
                                      std::to_string(raw_size()));
    }
    return BasisMatrix{apply_transform(z, transform), ortho.id};
}

BasisSet orthonormalize(const Matrix& z, double drop_tol, std::optional<BasisSpec> spec) {
    const auto n_paths = static_cast<std::size_t>(z.rows());
    const auto r = static_cast<std::size_t>(z.cols());
    if (n_paths == 0) throw DimensionError("N", "basis has no paths");
    if (r == 0) throw DimensionError("r", "basis has no columns");
    require_finite(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), "raw basis Z");
    if (!(drop_tol >= 0.0)) throw ConfigError("drop_tol must be nonnegative");

    // Column-major working copies: each column is one path vector.
    Eigen::MatrixXd zc = z;
    double max_norm = 0.0;
    for (std::size_t q = 0; q < r; ++q) {
        const double* c = zc.col(static_cast<Eigen::Index>(q)).data();
        max_norm = std::max(max_norm, std::sqrt(empirical_inner({c, n_paths}, {c, n_paths})));
    }

    std::vector<Eigen::VectorXd> xs;   // orthonormal path vectors
    std::vector<Eigen::VectorXd> ts;   // their coefficients in terms of Z
    std::vector<std::size_t> dropped;
    const auto& k = simd::active();

    for (std::size_t q = 0; q < r; ++q) {
        Eigen::VectorXd v = zc.col(static_cast<Eigen::Index>(q));
        Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r));
        t(static_cast<Eigen::Index>(q)) = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t s = 0; s < xs.size(); ++s) {
                const double c = empirical_inner({v.data(), n_paths}, {xs[s].data(), n_paths});
                k.axpy(-c, xs[s].data(), v.data(), n_paths);
                k.axpy(-c, ts[s].data(), t.data(), r);
            }
        }
        const double norm = std::sqrt(empirical_inner({v.data(), n_paths}, {v.data(), n_paths}));
        if (norm <= drop_tol * max_norm || norm == 0.0) {
            dropped.push_back(q);
            continue;
        }
        xs.push_back(v / norm);
        ts.push_back(t / norm);
    }
    if (xs.empty()) throw NumericalError("orthonormalization dropped every basis column");

    Matrix transform(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ts.size()));
    for (std::size_t s = 0; s < ts.size(); ++s) transform.col(static_cast<Eigen::Index>(s)) = ts[s];

    BasisSet out;
    out.raw = BasisMatrix{z, basis_identity("raw", spec, z, nullptr)};
    out.transform = std::move(transform);
    out.ortho = BasisMatrix{apply_transform(z, out.transform), basis_identity("onb", spec, z, &out.transform)};
    out.dropped = std::move(dropped);
    out.spec = std::move(spec);
    return out;
}

BasisSet raw_basis(const Matrix& z, std::optional<BasisSpec> spec) {
    if (z.rows() == 0) throw DimensionError("N", "basis has no paths");
    if (z.cols() == 0) throw DimensionError("r", "basis has no columns");
    require_finite(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), "raw basis Z");
    BasisSet out;
    out.raw = BasisMatrix{z, basis_identity("raw", spec, z, nullptr)};
    out.transform = Matrix::Identity(z.cols(), z.cols());
    out.ortho = out.raw;
    out.spec = std::move(spec);
    return out;
}

Matrix gram(const Matrix& z) {
    require_finite(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), "basis values");
    const Eigen::MatrixXd zc = z;
    const auto n_paths = static_cast<std::size_t>(z.rows());
    Matrix g(z.cols(), z.cols());
    for (Eigen::Index a = 0; a < z.cols(); ++a) {
        for (Eigen::Index c = a; c < z.cols(); ++c) {
            const double v = empirical_inner({zc.col(a).data(), n_paths}, {zc.col(c).data(), n_paths});
            g(a, c) = v;
            g(c, a) = v;
        }
    }
    return g;
}

Projection project(std::span<const double> u, const Matrix& x) {
    const auto n_paths = static_cast<std::size_t>(x.rows());
    if (u.size() != n_paths) {
        throw DimensionError("N", "vector has length " + std::to_string(u.size()) + ", basis has " +
                                      std::to_string(n_paths) + " paths");
    }
    const Eigen::MatrixXd xc = x;
    Projection out;
    out.fitted.assign(n_paths, 0.0);
    const auto& k = simd::active();
    for (Eigen::Index s = 0; s < x.cols(); ++s) {
        const double c = empirical_inner(u, {xc.col(s).data(), n_paths});
        out.coefficients.push_back(c);
        k.axpy(c, xc.col(s).data(), out.fitted.data(), n_paths);
    }
    return out;
}

}  // namespace hr
