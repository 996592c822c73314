#include "reopt/model.hpp"

#include "reopt/error.hpp"

#include <cmath>
#include <string>

namespace reopt {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }

void check_hazard(double hazard) {
    if (!(hazard >= 0.0 && hazard < 1.0)) {
        throw Error(ErrorCode::InvalidHazard,
                    "hazard must lie in [0, 1), got " + std::to_string(hazard));
    }
}

}  // namespace

void MarketParams::validate() const {
    if (!positive(spot)) throw Error(ErrorCode::InvalidParams, "spot must be > 0");
    if (!positive(sigma)) throw Error(ErrorCode::InvalidParams, "sigma must be > 0");
    if (!positive(maturity)) throw Error(ErrorCode::InvalidParams, "maturity must be > 0");
    if (steps < 1) throw Error(ErrorCode::InvalidParams, "steps must be >= 1");
    if (!nonnegative(rate)) throw Error(ErrorCode::InvalidParams, "rate must be >= 0");
    if (!nonnegative(div_yield)) throw Error(ErrorCode::InvalidParams, "div_yield must be >= 0");
}

void MoveFactors::validate() const {
    if (!positive(dt)) throw Error(ErrorCode::InvalidParams, "dt must be > 0");
    if (!positive(down) || !(down < mid) || !(mid < up) || !std::isfinite(up)) {
        throw Error(ErrorCode::InvalidParams, "factors must satisfy 0 < down < mid < up");
    }
    if (!positive(disc)) throw Error(ErrorCode::InvalidParams, "discount factor must be > 0");
}

MoveFactors make_factors(const MarketParams& params, FactorStyle style) {
    params.validate();
    MoveFactors f;
    f.dt = params.dt();
    f.mid = std::exp((params.rate - params.div_yield) * f.dt);
    f.disc = std::exp(-params.rate * f.dt);
    const double vol_step = params.sigma * std::sqrt(f.dt);
    switch (style) {
    case FactorStyle::Exponential:
        f.up = f.mid * std::exp(vol_step);
        f.down = f.mid * std::exp(-vol_step);
        break;
    case FactorStyle::Linear:
        if (!(params.sigma * params.sigma * f.dt < 1.0)) {
            throw Error(ErrorCode::InvalidParams,
                        "linear factors need sigma^2 * dt < 1 (down factor would be <= 0)");
        }
        f.up = f.mid * (1.0 + vol_step);
        f.down = f.mid * (1.0 - vol_step);
        break;
    }
    f.validate();
    return f;
}

namespace detail {

PeriodProbabilities calibrate(const MoveFactors& factors, double hazard) noexcept {
    const double spread = factors.up - factors.down;
    const double survive = 1.0 - hazard;
    return {
        .q_up = (factors.mid - factors.down) / spread * survive,
        .q_mid = hazard,
        .q_down = (factors.up - factors.mid) / spread * survive,
    };
}

}  // namespace detail

PeriodProbabilities homogeneous_probs(const MoveFactors& factors, double hazard) {
    factors.validate();
    check_hazard(hazard);
    return detail::calibrate(factors, hazard);
}

std::vector<Move> path_of_node(int period, std::size_t node) {
    std::vector<Move> path(static_cast<std::size_t>(period));
    for (int j = 0; j < period; ++j) {
        const bool up = (node >> (period - 1 - j)) & 1U;
        path[static_cast<std::size_t>(j)] = up ? Move::Up : Move::Down;
    }
    return path;
}

GeneralSchedule general_probs(const MoveFactors& factors, int steps, const HazardFn& hazard_fn) {
    factors.validate();
    if (steps < 1) throw Error(ErrorCode::InvalidParams, "steps must be >= 1");
    if (steps > kGeneralTreeMaxSteps) {
        throw Error(ErrorCode::TooLarge, "general tree guard: steps <= " +
                                             std::to_string(kGeneralTreeMaxSteps));
    }
    GeneralSchedule schedule;
    schedule.levels.resize(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const std::size_t width = std::size_t{1} << k;
        auto& level = schedule.levels[static_cast<std::size_t>(k)];
        level.resize(width);
        for (std::size_t p = 0; p < width; ++p) {
            const double h = hazard_fn(k, path_of_node(k, p));
            check_hazard(h);
            level[p] = detail::calibrate(factors, h);
        }
    }
    return schedule;
}

}  // namespace reopt
