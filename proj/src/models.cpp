#include "hedgeratio/models.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/parallel.hpp"
#include "hedgeratio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hr {

void GbmModel::validate() const {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw ConfigError("model spot must be positive");
    if (!std::isfinite(rate)) throw ConfigError("model rate must be finite");
    if (!(volatility >= 0.0) || !std::isfinite(volatility)) throw ConfigError("model volatility must be >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("model horizon must be positive");
    if (!(observation_time >= 0.0) || !(observation_time < horizon)) {
        throw ConfigError("observation time must satisfy 0 <= t < T");
    }
    if (steps < 1) throw ConfigError("model steps must be >= 1");
    if (paths < 1) throw ConfigError("model paths must be >= 1");
}

double GbmModel::discount() const { return std::exp(-rate * (horizon - observation_time)); }

std::vector<double> GbmModel::time_grid() const {
    std::vector<double> grid;
    for (std::size_t k = 0; k <= steps; ++k) {
        grid.push_back(k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps));
    }
    grid.push_back(observation_time);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

void ProductSpec::validate(const GbmModel& model) const {
    if (!std::isfinite(strike)) throw ConfigError("product strike must be finite");
    if (kind == PayoffKind::european_call && !(strike > 0.0)) throw ConfigError("call strike must be positive");
    if (std::abs(maturity - model.horizon) > 1e-12 * std::max(1.0, model.horizon)) {
        throw ConfigError("product maturity must equal the model horizon");
    }
}

std::string InstrumentSpec::name() const {
    std::string base = kind == InstrumentKind::stock ? "stock" : "bond";
    if (scale != 1.0) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", scale);
        base += "*" + std::string(buf);
    }
    return base;
}

StateTable simulate(const GbmModel& model, std::size_t threads) {
    model.validate();
    const std::vector<double> grid = model.time_grid();
    const std::size_t obs_step =
        static_cast<std::size_t>(std::find(grid.begin(), grid.end(), model.observation_time) - grid.begin());
    const double drift = model.rate - 0.5 * model.volatility * model.volatility;
    std::vector<double> dt(grid.size() - 1);
    std::vector<double> vol_sqrt_dt(grid.size() - 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        dt[k] = grid[k + 1] - grid[k];
        vol_sqrt_dt[k] = model.volatility * std::sqrt(dt[k]);
    }
    const double discount = model.discount();

    StateTable out;
    out.names = {state::kSpotObs, state::kSpotMat, state::kDiscount};
    out.values.resize(static_cast<Eigen::Index>(model.paths), 3);
    parallel_for_paths(model.paths, threads, [&](std::size_t first, std::size_t last) {
        for (std::size_t l = first; l < last; ++l) {
            double s = model.spot;
            double s_obs = obs_step == 0 ? s : 0.0;
            for (std::size_t k = 0; k < dt.size(); ++k) {
                const double z = model.volatility > 0.0 ? gaussian(model.seed, l, k) : 0.0;
                s *= std::exp(drift * dt[k] + vol_sqrt_dt[k] * z);
                if (k + 1 == obs_step) s_obs = s;
            }
            const auto row = static_cast<Eigen::Index>(l);
            out.values(row, 0) = s_obs;
            out.values(row, 1) = s;
            out.values(row, 2) = discount;
        }
    });
    return out;
}

namespace {

std::size_t primitive_slot(const std::vector<std::string>& primitives, const std::string& name) {
    const auto it = std::find(primitives.begin(), primitives.end(), name);
    return it == primitives.end() ? primitives.size() : static_cast<std::size_t>(it - primitives.begin());
}

void check_primitives(const std::vector<std::string>& primitives) {
    if (primitives.empty()) throw ConfigError("no primitives declared");
    if (primitives.size() > DualNumber::kMaxSeeds) throw ConfigError("too many primitives declared");
    for (std::size_t k = 0; k < primitives.size(); ++k) {
        const auto& p = primitives[k];
        if (p != primitive::kSpot && p != primitive::kDiscount) {
            throw ConfigError("primitive '" + p + "' is not in the declared set {S_t, D_tT}");
        }
        if (std::find(primitives.begin(), primitives.begin() + static_cast<std::ptrdiff_t>(k), p) !=
            primitives.begin() + static_cast<std::ptrdiff_t>(k)) {
            throw ConfigError("primitive '" + p + "' declared twice");
        }
    }
}

DualNumber seeded(double value, const std::vector<std::string>& primitives, const char* name) {
    const std::size_t slot = primitive_slot(primitives, name);
    if (slot == primitives.size()) return DualNumber(value, primitives.size());
    return DualNumber::variable(value, slot, primitives.size());
}

}  // namespace

PrimitiveSensitivityResult primitive_sensitivities(const GbmModel& model, const ProductSpec& product,
                                                   const std::vector<std::string>& primitives,
                                                   const StateTable& states, double kink_band, std::size_t threads) {
    product.validate(model);
    check_primitives(primitives);
    const auto c_obs = static_cast<Eigen::Index>(states.column(state::kSpotObs));
    const auto c_mat = static_cast<Eigen::Index>(states.column(state::kSpotMat));
    const auto c_disc = static_cast<Eigen::Index>(states.column(state::kDiscount));
    const std::size_t n_paths = states.n_paths();
    const std::size_t n = primitives.size();

    std::vector<double> b(n_paths * n);
    parallel_for_paths(n_paths, threads, [&](std::size_t first, std::size_t last) {
        for (std::size_t l = first; l < last; ++l) {
            const auto row = static_cast<Eigen::Index>(l);
            const double s_obs = states.values(row, c_obs);
            const double growth = states.values(row, c_mat) / s_obs;
            const DualNumber v = discounted_payoff(product, seeded(s_obs, primitives, primitive::kSpot),
                                                   seeded(states.values(row, c_disc), primitives, primitive::kDiscount),
                                                   growth);
            for (std::size_t i = 0; i < n; ++i) b[l * n + i] = v.derivative(i);
        }
    });

    KinkReport kinks;
    kinks.band = kink_band;
    if (product.kind == PayoffKind::european_call) {
        for (std::size_t l = 0; l < n_paths; ++l) {
            const double s_mat = states.values(static_cast<Eigen::Index>(l), c_mat);
            if (std::abs(s_mat - product.strike) <= kink_band * std::abs(product.strike)) kinks.paths.push_back(l);
        }
    }
    return {PrimitiveSensitivities(n_paths, n, std::move(b)), std::move(kinks)};
}

SensitivityTensor hedge_instrument_sensitivities(const StateTable& states,
                                                 const std::vector<InstrumentSpec>& instruments,
                                                 const std::vector<std::string>& primitives) {
    check_primitives(primitives);
    if (instruments.empty()) throw ConfigError("no hedge instruments declared");
    for (const auto& inst : instruments) {
        if (!std::isfinite(inst.scale) || inst.scale == 0.0) throw ConfigError("instrument scale must be finite and nonzero");
        const char* needs = inst.kind == InstrumentKind::stock ? primitive::kSpot : primitive::kDiscount;
        if (primitive_slot(primitives, needs) == primitives.size()) {
            throw ConfigError("instrument '" + inst.name() + "' depends on undeclared primitive '" + needs + "'");
        }
    }
    const auto c_obs = static_cast<Eigen::Index>(states.column(state::kSpotObs));
    const auto c_disc = static_cast<Eigen::Index>(states.column(state::kDiscount));
    const std::size_t n_paths = states.n_paths();
    const std::size_t n = primitives.size();
    const std::size_t m = instruments.size();

    std::vector<double> a(n_paths * n * m);
    for (std::size_t l = 0; l < n_paths; ++l) {
        const auto row = static_cast<Eigen::Index>(l);
        const DualNumber spot = seeded(states.values(row, c_obs), primitives, primitive::kSpot);
        const DualNumber disc = seeded(states.values(row, c_disc), primitives, primitive::kDiscount);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& inst = instruments[j];
            const DualNumber price = DualNumber(inst.scale, n) * (inst.kind == InstrumentKind::stock ? spot : disc);
            for (std::size_t i = 0; i < n; ++i) a[(l * n + i) * m + j] = price.derivative(i);
        }
    }
    return SensitivityTensor(n_paths, n, m, std::move(a));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double analytic_call_delta(double spot, double strike, double rate, double volatility, double tau) {
    if (!(spot > 0.0) || !(strike > 0.0) || !(tau > 0.0) || !(volatility >= 0.0)) {
        throw ConfigError("analytic delta needs spot, strike, tau > 0 and volatility >= 0");
    }
    if (volatility == 0.0) return spot * std::exp(rate * tau) > strike ? 1.0 : 0.0;
    const double sd = volatility * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * tau) / sd;
    return normal_cdf(d1);
}

double analytic_call_delta(const GbmModel& model, double strike) {
    if (model.observation_time != 0.0) throw ConfigError("analytic_call_delta(model) requires t = 0");
    return analytic_call_delta(model.spot, strike, model.rate, model.volatility, model.horizon);
}

}  // namespace hr
