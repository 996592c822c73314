#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace reopt {

/// Economic inputs of the lattice. Rates and yields are continuous annual.
struct MarketParams {
    double spot = 100.0;
    double rate = 0.10;
    double div_yield = 0.05;
    double sigma = 0.30;
    double maturity = 1.0;
    int steps = 20;

    double dt() const noexcept { return maturity / steps; }

    /// Throws Error(InvalidParams) unless every field is in its domain.
    void validate() const;
};

enum class FactorStyle {
    Exponential,  ///< u,d = m * exp(+-sigma * sqrt(dt))
    Linear,       ///< u,d = m * (1 +- sigma * sqrt(dt)); needs sigma^2 dt < 1
};

/// Per-step ex-dividend movement factors. `mid` doubles as the risk-neutral
/// growth factor exp((r - y) dt), so the drift identity can be evaluated
/// without re-deriving the exponential.
struct MoveFactors {
    double up = 0.0;
    double mid = 0.0;
    double down = 0.0;
    double dt = 0.0;
    double disc = 1.0;  ///< exp(-r dt)

    /// Throws Error(InvalidParams) unless 0 < down < mid < up and dt > 0.
    void validate() const;

    /// Binomial (CRR) up-probability (mid - down) / (up - down).
    double binomial_up() const noexcept { return (mid - down) / (up - down); }
    double binomial_down() const noexcept { return (up - mid) / (up - down); }
};

struct PeriodProbabilities {
    double q_up = 0.0;
    double q_mid = 0.0;
    double q_down = 0.0;
};

enum class Move : std::uint8_t { Down = 0, Mid = 1, Up = 2 };

MoveFactors make_factors(const MarketParams& params, FactorStyle style = FactorStyle::Exponential);

/// Calibrates one period with middle (early-expiry) probability `hazard`.
/// Requires 0 <= hazard < 1; hazard == 0 yields the binomial step.
PeriodProbabilities homogeneous_probs(const MoveFactors& factors, double hazard);

/// Conditional expiry probability at `period` given the up/down path taken
/// so far (path.size() == period, entries are Move::Up or Move::Down).
using HazardFn = std::function<double(int period, std::span<const Move> path)>;

/// Node-specific probabilities on the non-recombining up/down tree.
/// Level k holds 2^k nodes; node p at level k has children 2p (down) and
/// 2p+1 (up), so the bits of p read from the most significant end spell the
/// path (1 = up).
struct GeneralSchedule {
    std::vector<std::vector<PeriodProbabilities>> levels;

    int steps() const noexcept { return static_cast<int>(levels.size()); }
    const PeriodProbabilities& at(int period, std::size_t node) const { return levels[period][node]; }
};

inline constexpr int kGeneralTreeMaxSteps = 20;

GeneralSchedule general_probs(const MoveFactors& factors, int steps, const HazardFn& hazard_fn);

/// Unpacks node index `node` at level `period` into its move sequence.
std::vector<Move> path_of_node(int period, std::size_t node);

namespace detail {
/// Same calibration as homogeneous_probs but admits hazard == 1, which the
/// pricers use for a period at which expiry is certain (survival exhausted).
PeriodProbabilities calibrate(const MoveFactors& factors, double hazard) noexcept;
}  // namespace detail

}  // namespace reopt
