#pragma once

#include "reopt/expiry.hpp"
#include "reopt/model.hpp"
#include "reopt/payoff.hpp"
#include "reopt/pricer.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace reopt {

using PricerFn = std::function<PriceResult(const MarketParams&, const MoveFactors&, const ExpiryLaw&,
                                           const PayoffSpec&)>;

struct NamedPricer {
    std::string name;
    PricerFn fn;
};

/// Trinomial, recursive binomial, recombining and conditioning-sum pricers.
std::vector<NamedPricer> homogeneous_pricers();

/// One randomized parameterization: N in [1, max_steps], sigma in
/// [0.05, 0.6], r and y in [0, 0.12], lambda dt in [0.01, 0.9], T in
/// [0.25, 2], spot in [50, 150] and one of the four standard payoffs with
/// strike 100. Depends only on (seed, index).
struct RandomCase {
    std::size_t index = 0;
    MarketParams params;
    double hazard = 0.0;
    PayoffSpec payoff = PayoffSpec::call(100.0);
};

RandomCase random_case(std::uint64_t seed, std::size_t index, int max_steps);

struct SelftestOptions {
    std::size_t cases = 1000;
    std::size_t enum_cases = 200;
    std::uint64_t seed = 42;
    unsigned workers = 0;
    double tolerance = 1e-9;        ///< pairwise cross-algorithm
    double enum_tolerance = 1e-12;  ///< each pricer vs path enumeration
};

struct SelftestReport {
    std::size_t cases = 0;
    std::size_t consistent = 0;
    double max_discrepancy = 0.0;
    std::size_t enum_cases = 0;
    std::size_t enum_passed = 0;
    double enum_max_error = 0.0;
    double enum_max_prob_error = 0.0;  ///< |sum of path probabilities - 1|
    double tolerance = 0.0;
    double enum_tolerance = 0.0;
    std::vector<std::string> failures;

    bool ok() const noexcept { return failures.empty(); }
};

/// Cross-algorithm consistency over `cases` random parameterizations
/// (N <= 12) plus the enumeration oracle over `enum_cases` (N <= 8).
/// Output is independent of the worker count.
SelftestReport run_selftest(const SelftestOptions& opts,
                            const std::vector<NamedPricer>& pricers = homogeneous_pricers());

void print_report(std::ostream& os, const SelftestReport& report);

}  // namespace reopt
