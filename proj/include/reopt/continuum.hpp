#pragma once

#include "reopt/expiry.hpp"
#include "reopt/model.hpp"
#include "reopt/payoff.hpp"
#include "reopt/rng.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace reopt {

/// Diffusion inputs of the continuous-time limit (no lattice).
struct GbmParams {
    double spot = 100.0;
    double rate = 0.10;
    double div_yield = 0.05;
    double sigma = 0.30;
};

inline GbmParams gbm_of(const MarketParams& p) { return {p.spot, p.rate, p.div_yield, p.sigma}; }

struct McConfig {
    std::uint64_t n_paths = 100'000;
    /// Brownian steps per unit time. The terminal value W(tau) is sampled
    /// exactly, so this only matters to path-dependent extensions.
    int time_grid = 1;
    std::uint64_t seed = 42;
    bool antithetic = false;
    /// The limit result covers bounded payoffs only; set to price unbounded ones anyway.
    bool force_unbounded = false;
    /// 0 = hardware concurrency. Results do not depend on this value.
    unsigned workers = 0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    double ci99_low = 0.0;
    double ci99_high = 0.0;
};

/// Inverse-CDF draw of the continuous expiry time.
double sample_expiry(const ContinuousExpiry& cont, CounterRng& rng);

/// E[exp(-r tau) f(S(tau))] for geometric Brownian motion stopped at an
/// independent random time tau.
McEstimate mc_price(const GbmParams& params, const ContinuousExpiry& cont, const PayoffSpec& payoff,
                    const McConfig& cfg);

struct ConvergenceRow {
    int n = 0;  ///< periods per unit time
    double tree_price = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double abs_diff = 0.0;
};

/// For each n, prices the floor-discretized expiry on the recombining lattice
/// with n T steps and compares against one shared Monte-Carlo estimate.
/// `params.steps` and `params.maturity` are replaced by n T and the expiry
/// horizon respectively.
std::vector<ConvergenceRow> convergence_study(const MarketParams& params, const ContinuousExpiry& cont,
                                              const PayoffSpec& payoff, std::span<const int> steps_list,
                                              const McConfig& cfg,
                                              FactorStyle style = FactorStyle::Exponential);

/// Columns n, tree_price, mc_mean, mc_se, abs_diff.
void write_csv(std::ostream& os, std::span<const ConvergenceRow> rows);

}  // namespace reopt
