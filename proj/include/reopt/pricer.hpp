#pragma once

#include "reopt/expiry.hpp"
#include "reopt/model.hpp"
#include "reopt/payoff.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace reopt {

enum class Algorithm {
    Trinomial,          ///< full trinomial tree with ad hoc node initialization
    RecursiveBinomial,  ///< non-recombining binomial recursion, virtual middle branch
    Recombining,        ///< recombining binomial lattice, virtual middle branch
    ConditioningSum,    ///< sum over k of Q(tau = k) times the k-step binomial price
    PathEnumeration,    ///< brute force over all 3^N paths
    GeneralTree,        ///< node-dependent hazards on the 2^N binomial tree
};

std::string_view to_string(Algorithm algo) noexcept;
/// Accepts the CLI tags tri, recursive, reco, sum, enum, general.
std::optional<Algorithm> parse_algorithm(std::string_view tag) noexcept;

struct PriceResult {
    double value = 0.0;
    Algorithm algo = Algorithm::Recombining;
    std::uint64_t nodes_touched = 0;
    std::chrono::nanoseconds wall_time{0};
};

struct PathRecord {
    std::vector<Move> moves;
    double probability = 0.0;
    int expiry_period = 0;  ///< first middle move, N if none
    double discounted_payoff = 0.0;
};

struct EnumerationResult {
    PriceResult price;
    std::vector<PathRecord> paths;
};

struct PriceRange {
    double low = 0.0;
    double high = 0.0;
    std::vector<double> per_k_prices;  ///< exp(-r k dt) E[f(S_k) | tau = k], k = 0..N
    bool degenerate = false;           ///< all per-k prices coincide
};

// Memory and recursion guards; beyond these the pricers throw TooLarge.
inline constexpr int kTrinomialMaxSteps = 16;
inline constexpr int kRecursiveMaxSteps = 25;
inline constexpr int kEnumerationMaxSteps = 8;

/// Per-period calibrated probabilities read from the law's hazards.
std::vector<PeriodProbabilities> period_schedule(const MoveFactors& factors, const ExpiryLaw& law);

/// Heap-ordered trinomial stock tree: children of node i sit at 3i+1 (down),
/// 3i+2 (mid) and 3i+3 (up). Size (3^{N+1} - 1) / 2.
std::vector<double> stock_trinomial_tree(const MarketParams& params, const MoveFactors& factors);

/// Fixed-expiry k-step binomial prices exp(-r k dt) E[f(S_k)], k = 0..N.
std::vector<double> conditional_prices(const MarketParams& params, const MoveFactors& factors,
                                       const PayoffSpec& payoff);

PriceResult price_trinomial(const MarketParams& params, const MoveFactors& factors,
                            const ExpiryLaw& law, const PayoffSpec& payoff);

PriceResult price_recursive_binomial(const MarketParams& params, const MoveFactors& factors,
                                     const ExpiryLaw& law, const PayoffSpec& payoff);

PriceResult price_recombining(const MarketParams& params, const MoveFactors& factors,
                              const ExpiryLaw& law, const PayoffSpec& payoff);

PriceResult price_conditioning_sum(const MarketParams& params, const MoveFactors& factors,
                                   const ExpiryLaw& law, const PayoffSpec& payoff);

EnumerationResult price_path_enumeration(const MarketParams& params, const MoveFactors& factors,
                                         const ExpiryLaw& law, const PayoffSpec& payoff);

/// S0 * E[exp(-y tau dt)].
double price_zsc_closed_form(const MarketParams& params, const ExpiryLaw& law);

/// Hull of the fixed-expiry prices. Any admissible expiry law prices inside
/// [low, high]; the no-arbitrage interval itself is open.
PriceRange price_range(const MarketParams& params, const MoveFactors& factors, const PayoffSpec& payoff);

PriceResult price_general_tree(const MarketParams& params, const MoveFactors& factors,
                               const HazardFn& hazard_fn, const PayoffSpec& payoff);

/// Dispatches to one of the homogeneous pricers (everything but GeneralTree).
PriceResult price_with(Algorithm algo, const MarketParams& params, const MoveFactors& factors,
                       const ExpiryLaw& law, const PayoffSpec& payoff);

/// Node/call count each algorithm reports for N steps.
std::uint64_t expected_nodes_touched(Algorithm algo, int steps);

}  // namespace reopt
