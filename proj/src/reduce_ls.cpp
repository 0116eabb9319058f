#include "hedgeratio/reduce_ls.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/simd.hpp"

namespace hr {

ResidualWeights ResidualWeights::shared(Matrix w) {
    ResidualWeights out;
    out.kind_ = Kind::shared;
    out.w_.push_back(std::move(w));
    return out;
}

ResidualWeights ResidualWeights::per_path(std::vector<Matrix> w) {
    ResidualWeights out;
    out.kind_ = Kind::per_path;
    out.w_ = std::move(w);
    return out;
}

std::string ResidualWeights::tag() const {
    switch (kind_) {
        case Kind::identity: return "identity";
        case Kind::shared: return "shared";
        case Kind::per_path: return "per-path";
    }
    return "unknown";
}

void ResidualWeights::validate(std::size_t n_paths, std::size_t n_primitives) const {
    if (kind_ == Kind::identity) return;
    if (kind_ == Kind::per_path && w_.size() != n_paths) {
        throw DimensionError("N", "got " + std::to_string(w_.size()) + " per-path weight matrices");
    }
    for (const auto& w : w_) {
        if (static_cast<std::size_t>(w.rows()) != n_primitives || static_cast<std::size_t>(w.cols()) != n_primitives) {
            throw DimensionError("n", "weight matrix must be n x n");
        }
        require_finite({w.data(), static_cast<std::size_t>(w.size())}, "residual weights");
    }
}

const Matrix& ResidualWeights::at(std::size_t l) const { return kind_ == Kind::shared ? w_.front() : w_[l]; }

std::pair<SensitivityTensor, PrimitiveSensitivities> apply_weights(const SensitivityTensor& a,
                                                                   const PrimitiveSensitivities& b,
                                                                   const ResidualWeights& w) {
    const std::size_t n_paths = a.n_paths();
    const std::size_t n = a.n_primitives();
    const std::size_t m = a.n_instruments();
    w.validate(n_paths, n);
    if (w.kind() == ResidualWeights::Kind::identity) return {a, b};
    std::vector<double> wa(n_paths * n * m);
    std::vector<double> wb(n_paths * n);
    for (std::size_t l = 0; l < n_paths; ++l) {
        const Matrix& wl = w.at(l);
        const Matrix al = a.path_matrix(l);
        const Matrix prod = wl * al;
        std::copy(prod.data(), prod.data() + n * m, wa.begin() + static_cast<std::ptrdiff_t>(l * n * m));
        const auto bl = b.path(l);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += wl(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * bl[k];
            wb[l * n + i] = s;
        }
    }
    return {SensitivityTensor(n_paths, n, m, std::move(wa)), PrimitiveSensitivities(n_paths, n, std::move(wb))};
}

NormalSystem assemble_normal(const SensitivityTensor& a_in, const PrimitiveSensitivities& b_in, const Matrix& x,
                             const ResidualWeights& w, const AssemblyOptions& options) {
    const ProblemDims dims = validate_problem(a_in, b_in, x);
    const auto [a, b] = apply_weights(a_in, b_in, w);
    const std::size_t n = dims.n_primitives;
    const std::size_t m = dims.n_instruments;
    const std::size_t r = dims.n_basis;
    const std::size_t mr = m * r;
    const auto& k = simd::active();

    // Buffer layout: upper triangle of G (row-major mr x mr), then h.
    auto accumulate = [&](std::size_t first, std::size_t last, std::span<double> buf) {
        std::vector<double> u(mr);
        double* g = buf.data();
        double* h = buf.data() + mr * mr;
        for (std::size_t l = first; l < last; ++l) {
            const double* xl = x.data() + l * r;
            for (std::size_t i = 0; i < n; ++i) {
                const double* ai = a.row(l, i).data();
                for (std::size_t q = 0; q < r; ++q) k.scale(xl[q], ai, u.data() + q * m, m);
                for (std::size_t c = 0; c < mr; ++c) {
                    if (u[c] != 0.0) k.axpy(u[c], u.data() + c, g + c * mr + c, mr - c);
                }
                const double bi = b.at(l, i);
                if (bi != 0.0) k.axpy(bi, u.data(), h, mr);
            }
        }
    };
    std::vector<double> buf = reduce_over_paths(dims.n_paths, mr * mr + mr, options, accumulate);
    require_finite(buf, "normal-equation accumulation");

    const double inv_n = 1.0 / static_cast<double>(dims.n_paths);
    NormalSystem out;
    out.g.resize(static_cast<Eigen::Index>(mr), static_cast<Eigen::Index>(mr));
    out.h.resize(static_cast<Eigen::Index>(mr));
    for (std::size_t c = 0; c < mr; ++c) {
        for (std::size_t d = c; d < mr; ++d) {
            const double v = buf[c * mr + d] * inv_n;
            out.g(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) = v;
            out.g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) = v;
        }
        out.h(static_cast<Eigen::Index>(c)) = buf[mr * mr + c] * inv_n;
    }
    out.maps = FlatIndexMaps{n, r, m, r};
    out.weight_tag = w.tag();
    out.n_paths = dims.n_paths;
    return out;
}

std::vector<double> apply_design(std::span<const double> z, const SensitivityTensor& a, const Matrix& x) {
    const std::size_t n_paths = a.n_paths();
    const std::size_t n = a.n_primitives();
    const std::size_t m = a.n_instruments();
    const auto r = static_cast<std::size_t>(x.cols());
    if (static_cast<std::size_t>(x.rows()) != n_paths) throw DimensionError("N", "X rows differ from A paths");
    if (z.size() != m * r) throw DimensionError("m*r", "coefficient vector has length " + std::to_string(z.size()));
    const auto& k = simd::active();
    std::vector<double> out(n_paths * n);
    std::vector<double> phi(m);
    for (std::size_t l = 0; l < n_paths; ++l) {
        std::fill(phi.begin(), phi.end(), 0.0);
        const double* xl = x.data() + l * r;
        for (std::size_t q = 0; q < r; ++q) k.axpy(xl[q], z.data() + q * m, phi.data(), m);
        for (std::size_t i = 0; i < n; ++i) out[l * n + i] = k.dot(a.row(l, i).data(), phi.data(), m);
    }
    return out;
}

std::vector<double> apply_design_adjoint(std::span<const double> v, const SensitivityTensor& a, const Matrix& x) {
    const std::size_t n_paths = a.n_paths();
    const std::size_t n = a.n_primitives();
    const std::size_t m = a.n_instruments();
    const auto r = static_cast<std::size_t>(x.cols());
    if (static_cast<std::size_t>(x.rows()) != n_paths) throw DimensionError("N", "X rows differ from A paths");
    if (v.size() != n_paths * n) throw DimensionError("N*n", "vector has length " + std::to_string(v.size()));
    const auto& k = simd::active();
    std::vector<double> out(m * r, 0.0);
    std::vector<double> w(m);
    for (std::size_t l = 0; l < n_paths; ++l) {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) k.axpy(v[l * n + i], a.row(l, i).data(), w.data(), m);
        const double* xl = x.data() + l * r;
        for (std::size_t q = 0; q < r; ++q) k.axpy(xl[q], w.data(), out.data() + q * m, m);
    }
    return out;
}

double ls_objective(const HedgeCoefficients& xi, const SensitivityTensor& a, const PrimitiveSensitivities& b,
                    const Matrix& x, const ResidualWeights& w) {
    const ProblemDims dims = validate_problem(a, b, x);
    if (xi.n_instruments() != dims.n_instruments) throw DimensionError("m", "coefficients vs A instruments");
    w.validate(dims.n_paths, dims.n_primitives);
    const std::vector<double> fit = apply_design(xi.flat(), a, x);
    const std::size_t n = dims.n_primitives;
    double total = 0.0;
    Vector res(static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < dims.n_paths; ++l) {
        for (std::size_t i = 0; i < n; ++i) res(static_cast<Eigen::Index>(i)) = fit[l * n + i] - b.at(l, i);
        if (w.kind() == ResidualWeights::Kind::identity) {
            total += res.squaredNorm();
        } else {
            total += (w.at(l) * res).squaredNorm();
        }
    }
    return total / static_cast<double>(dims.n_paths);
}

}  // namespace hr
