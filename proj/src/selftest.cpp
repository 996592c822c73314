#include "reopt/selftest.hpp"

#include "reopt/parallel.hpp"
#include "reopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace reopt {

namespace {

struct CaseOutcome {
    double discrepancy = 0.0;
    std::string failure;
};

std::string describe(const RandomCase& c) {
    std::ostringstream os;
    os.precision(17);
    os << "case " << c.index << " {N=" << c.params.steps << ", T=" << c.params.maturity
       << ", spot=" << c.params.spot << ", sigma=" << c.params.sigma << ", r=" << c.params.rate
       << ", y=" << c.params.div_yield << ", hazard=" << c.hazard << ", payoff=" << c.payoff.name() << "}";
    return os.str();
}

std::string sci(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// The pricer farthest from the median is reported as the divergent one.
std::size_t most_divergent(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::size_t worst = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (std::abs(values[i] - median) > std::abs(values[worst] - median)) worst = i;
    }
    return worst;
}

}  // namespace

std::vector<NamedPricer> homogeneous_pricers() {
    std::vector<NamedPricer> out;
    for (Algorithm a : {Algorithm::Trinomial, Algorithm::RecursiveBinomial, Algorithm::Recombining,
                        Algorithm::ConditioningSum}) {
        out.push_back({std::string(to_string(a)),
                       [a](const MarketParams& p, const MoveFactors& f, const ExpiryLaw& l, const PayoffSpec& x) {
                           return price_with(a, p, f, l, x);
                       }});
    }
    return out;
}

RandomCase random_case(std::uint64_t seed, std::size_t index, int max_steps) {
    CounterRng rng(seed, index);
    const auto between = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    RandomCase c;
    c.index = index;
    c.params.steps = 1 + static_cast<int>(rng.uniform() * max_steps);
    c.params.sigma = between(0.05, 0.6);
    c.params.rate = between(0.0, 0.12);
    c.params.div_yield = between(0.0, 0.12);
    c.params.maturity = between(0.25, 2.0);
    c.params.spot = between(50.0, 150.0);
    c.hazard = between(0.01, 0.9);
    static const char* const kPayoffs[] = {"call", "put", "zsc", "logcontract"};
    c.payoff = parse_payoff(kPayoffs[static_cast<std::size_t>(rng.uniform() * 4)], 100.0);
    return c;
}

SelftestReport run_selftest(const SelftestOptions& opts, const std::vector<NamedPricer>& pricers) {
    SelftestReport report;
    report.cases = opts.cases;
    report.enum_cases = opts.enum_cases;
    report.tolerance = opts.tolerance;
    report.enum_tolerance = opts.enum_tolerance;

    std::vector<CaseOutcome> consistency(opts.cases);
    parallel_for(opts.cases, opts.workers, [&](std::size_t i) {
        const RandomCase c = random_case(opts.seed, i, 12);
        const MoveFactors f = make_factors(c.params);
        const ExpiryLaw law = geometric_law(c.hazard, c.params.steps);
        std::vector<double> values;
        for (const auto& p : pricers) values.push_back(p.fn(c.params, f, law, c.payoff).value);
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        auto& out = consistency[i];
        out.discrepancy = *hi - *lo;
        if (!(out.discrepancy < opts.tolerance)) {
            out.failure = describe(c) + ": algorithm '" + pricers[most_divergent(values)].name +
                          "' diverges, max pairwise discrepancy " + sci(out.discrepancy);
        }
    });

    // The enumeration suite uses an independent seed stream (high bit set).
    const std::uint64_t enum_seed = opts.seed ^ 0x8000'0000'0000'0000ULL;
    std::vector<CaseOutcome> oracle(opts.enum_cases);
    std::vector<double> prob_errors(opts.enum_cases);
    parallel_for(opts.enum_cases, opts.workers, [&](std::size_t i) {
        const RandomCase c = random_case(enum_seed, i, kEnumerationMaxSteps);
        const MoveFactors f = make_factors(c.params);
        const ExpiryLaw law = geometric_law(c.hazard, c.params.steps);
        const auto truth = price_path_enumeration(c.params, f, law, c.payoff);
        double total = 0.0;
        for (const auto& path : truth.paths) total += path.probability;
        prob_errors[i] = std::abs(total - 1.0);
        auto& out = oracle[i];
        for (const auto& p : pricers) {
            const double err = std::abs(p.fn(c.params, f, law, c.payoff).value - truth.price.value);
            out.discrepancy = std::max(out.discrepancy, err);
            if (!(err <= opts.enum_tolerance) && out.failure.empty()) {
                out.failure = describe(c) + ": algorithm '" + p.name + "' differs from path enumeration by " +
                              sci(err);
            }
        }
        if (!(prob_errors[i] <= 1e-10) && out.failure.empty()) {
            out.failure = describe(c) + ": path probabilities do not sum to 1";
        }
    });

    for (const auto& o : consistency) {
        report.max_discrepancy = std::max(report.max_discrepancy, o.discrepancy);
        if (o.failure.empty()) ++report.consistent;
        else report.failures.push_back(o.failure);
    }
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        report.enum_max_error = std::max(report.enum_max_error, oracle[i].discrepancy);
        report.enum_max_prob_error = std::max(report.enum_max_prob_error, prob_errors[i]);
        if (oracle[i].failure.empty()) ++report.enum_passed;
        else report.failures.push_back(oracle[i].failure);
    }
    return report;
}

void print_report(std::ostream& os, const SelftestReport& r) {
    os << r.consistent << '/' << r.cases << " consistent, max discrepancy "
       << (r.max_discrepancy < r.tolerance ? "< " : ">= ") << r.tolerance << " (" << r.max_discrepancy << ")\n";
    os << r.enum_passed << '/' << r.enum_cases << " match path enumeration within " << r.enum_tolerance
       << " (max error " << r.enum_max_error << ", max |sum p - 1| " << r.enum_max_prob_error << ")\n";
    for (const auto& f : r.failures) os << "FAIL " << f << '\n';
    os << (r.ok() ? "selftest passed" : "selftest FAILED") << '\n';
}

}  // namespace reopt
