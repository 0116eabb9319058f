#pragma once

#include "hedgeratio/basis.hpp"
#include "hedgeratio/dual.hpp"
#include "hedgeratio/tensors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hr {

/// Names of the per-path state variables produced by simulate().
namespace state {
inline constexpr const char* kSpotObs = "S_t";     // spot at the observation time
inline constexpr const char* kSpotMat = "S_T";     // spot at the horizon
inline constexpr const char* kDiscount = "D_tT";   // discount factor from t to T
}  // namespace state

/// Model primitives a sensitivity can be taken against.
namespace primitive {
inline constexpr const char* kSpot = "S_t";
inline constexpr const char* kDiscount = "D_tT";
}  // namespace primitive

/// Geometric Brownian motion under the risk-neutral measure with a flat rate.
/// Discounting is deterministic: D(t, T) = exp(-rate * (T - t)).
struct GbmModel {
    double spot = 100.0;
    double rate = 0.0;
    double volatility = 0.2;
    double horizon = 1.0;           // T
    double observation_time = 0.0;  // t
    std::size_t steps = 1;          // uniform steps on [0, T]; t is added to the grid
    std::size_t paths = 1000;
    std::uint64_t seed = 1;

    /// Throws ConfigError unless spot > 0, volatility >= 0, 0 <= t < T, steps, paths >= 1.
    void validate() const;
    [[nodiscard]] double discount() const;
    /// Sorted simulation times, starting at 0 and containing t and T.
    [[nodiscard]] std::vector<double> time_grid() const;
};

enum class PayoffKind { forward, european_call };

struct ProductSpec {
    PayoffKind kind = PayoffKind::forward;
    double strike = 100.0;
    double maturity = 1.0;

    /// The maturity must coincide with the model horizon.
    void validate(const GbmModel& model) const;
};

enum class InstrumentKind { stock, bond };

/// A hedge instrument priced from the primitives: stock = scale * S_t,
/// bond = scale * D_tT (zero-coupon bond paying `scale` at T).
struct InstrumentSpec {
    InstrumentKind kind = InstrumentKind::stock;
    double scale = 1.0;

    [[nodiscard]] std::string name() const;
};

/// Exact-scheme simulation. Columns S_t, S_T, D_tT; identical output for the
/// same seed regardless of `threads`.
[[nodiscard]] StateTable simulate(const GbmModel& model, std::size_t threads = 1);

/// Discounted payoff D * payoff(S_t * growth), with growth = S_T / S_t held fixed.
template <class T>
T discounted_payoff(const ProductSpec& product, const T& spot_obs, const T& discount, double growth) {
    const T spot_mat = spot_obs * T(growth);
    switch (product.kind) {
        case PayoffKind::forward:
            return discount * (spot_mat - T(product.strike));
        case PayoffKind::european_call:
            return discount * max(spot_mat - T(product.strike), 0.0);
    }
    return T(0.0);
}

struct KinkReport {
    double band = 0.0;
    /// Paths with |S_T - K| / K <= band.
    std::vector<std::size_t> paths;
};

struct PrimitiveSensitivityResult {
    PrimitiveSensitivities b;
    KinkReport kinks;
};

inline constexpr double kDefaultKinkBand = 1e-3;

/// b[l, i] = dV(t, w_l) / dM_i by dual-number propagation through the discounted payoff.
/// `primitives` are names from hr::primitive; unknown names throw ConfigError.
[[nodiscard]] PrimitiveSensitivityResult primitive_sensitivities(const GbmModel& model, const ProductSpec& product,
                                                                 const std::vector<std::string>& primitives,
                                                                 const StateTable& states,
                                                                 double kink_band = kDefaultKinkBand,
                                                                 std::size_t threads = 1);

/// A[l, i, j] = dP_j / dM_i. Throws ConfigError if an instrument depends on an undeclared primitive.
[[nodiscard]] SensitivityTensor hedge_instrument_sensitivities(const StateTable& states,
                                                               const std::vector<InstrumentSpec>& instruments,
                                                               const std::vector<std::string>& primitives);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x);

/// Black-Scholes call delta N(d1) for spot S, remaining maturity tau.
/// With volatility 0 the limit 1{S e^{r tau} > K} is returned.
[[nodiscard]] double analytic_call_delta(double spot, double strike, double rate, double volatility, double tau);

/// Delta at time 0 for the model's spot and horizon. Requires observation_time == 0.
[[nodiscard]] double analytic_call_delta(const GbmModel& model, double strike);

}  // namespace hr
