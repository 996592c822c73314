#include "reopt/pricer.hpp"

#include "reopt/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace reopt {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t pow3(int n) {
    std::uint64_t p = 1;
    for (int i = 0; i < n; ++i) p *= 3;
    return p;
}

void check_lattice(const MarketParams& params, const MoveFactors& factors) {
    params.validate();
    factors.validate();
    const double dt = params.dt();
    if (std::abs(factors.dt - dt) > 1e-12 * dt) {
        throw Error(ErrorCode::InvalidParams, "move factors were built for a different dt");
    }
}

void check_inputs(const MarketParams& params, const MoveFactors& factors, const ExpiryLaw& law) {
    check_lattice(params, factors);
    if (law.steps() != params.steps) {
        throw Error(ErrorCode::InvalidLaw, "expiry law has " + std::to_string(law.steps()) +
                                               " periods, lattice has " + std::to_string(params.steps));
    }
}

void check_guard(const char* name, int steps, int limit) {
    if (steps > limit) {
        throw Error(ErrorCode::TooLarge, std::string(name) + " guard: steps <= " + std::to_string(limit) +
                                             " (got " + std::to_string(steps) + ")");
    }
}

PriceResult finish(double value, Algorithm algo, std::uint64_t nodes, Clock::time_point start) {
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFinitePayoff, std::string(to_string(algo)) + " produced a non-finite price");
    }
    return {value, algo, nodes, std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start)};
}

class BinomialRecursion {
public:
    BinomialRecursion(const MarketParams& params, const MoveFactors& factors,
                      std::span<const PeriodProbabilities> schedule, const PayoffSpec& payoff)
        : steps_(params.steps), factors_(factors), schedule_(schedule), payoff_(payoff) {}

    double value(double spot) { return node(spot, 0); }
    std::uint64_t work() const noexcept { return work_; }

private:
    double node(double s, int k) {
        ++work_;
        if (k == steps_) return payoff_(s);
        ++work_;  // virtual middle branch
        const auto& q = schedule_[static_cast<std::size_t>(k)];
        const double b = factors_.disc;
        const double down = node(s * factors_.down, k + 1);
        const double mid = payoff_(s);
        const double up = node(s * factors_.up, k + 1);
        return b * q.q_down * down + q.q_mid * mid + b * q.q_up * up;
    }

    int steps_;
    const MoveFactors& factors_;
    std::span<const PeriodProbabilities> schedule_;
    const PayoffSpec& payoff_;
    std::uint64_t work_ = 0;
};

}  // namespace

std::string_view to_string(Algorithm algo) noexcept {
    switch (algo) {
    case Algorithm::Trinomial: return "tri";
    case Algorithm::RecursiveBinomial: return "recursive";
    case Algorithm::Recombining: return "reco";
    case Algorithm::ConditioningSum: return "sum";
    case Algorithm::PathEnumeration: return "enum";
    case Algorithm::GeneralTree: return "general";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view tag) noexcept {
    for (auto a : {Algorithm::Trinomial, Algorithm::RecursiveBinomial, Algorithm::Recombining,
                   Algorithm::ConditioningSum, Algorithm::PathEnumeration, Algorithm::GeneralTree}) {
        if (to_string(a) == tag) return a;
    }
    return std::nullopt;
}

std::vector<PeriodProbabilities> period_schedule(const MoveFactors& factors, const ExpiryLaw& law) {
    const auto hazards = law.hazards();
    std::vector<PeriodProbabilities> schedule;
    schedule.reserve(hazards.size());
    for (double h : hazards) schedule.push_back(detail::calibrate(factors, h));
    return schedule;
}

std::vector<double> stock_trinomial_tree(const MarketParams& params, const MoveFactors& factors) {
    check_lattice(params, factors);
    check_guard("trinomial", params.steps, kTrinomialMaxSteps);
    const std::uint64_t total = (pow3(params.steps + 1) - 1) / 2;
    const std::uint64_t internal = (pow3(params.steps) - 1) / 2;
    std::vector<double> stock(total);
    stock[0] = params.spot;
    for (std::uint64_t i = 0; i < internal; ++i) {
        stock[3 * i + 1] = factors.down * stock[i];
        stock[3 * i + 2] = factors.mid * stock[i];
        stock[3 * i + 3] = factors.up * stock[i];
    }
    return stock;
}

PriceResult price_trinomial(const MarketParams& params, const MoveFactors& factors,
                            const ExpiryLaw& law, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_inputs(params, factors, law);
    check_guard("trinomial", params.steps, kTrinomialMaxSteps);
    const int n = params.steps;
    const auto schedule = period_schedule(factors, law);
    const auto stock = stock_trinomial_tree(params, factors);

    // NaN marks "not yet expired". Internal nodes on or below a middle branch
    // hold the carried early payoff until backward induction overwrites them.
    std::vector<double> option(stock.size(), std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < n; ++k) {
        const double carry = std::exp(params.rate * (n - k) * factors.dt);
        const std::uint64_t first = (pow3(k) - 1) / 2;
        const std::uint64_t last = (pow3(k + 1) - 1) / 2;
        for (std::uint64_t i = first; i < last; ++i) {
            if (std::isnan(option[i])) {
                option[3 * i + 2] = payoff(stock[i]) * carry;
            } else {
                option[3 * i + 1] = option[3 * i + 2] = option[3 * i + 3] = option[i];
            }
        }
    }

    std::uint64_t touched = 0;
    for (std::uint64_t j = (pow3(n) - 1) / 2; j < option.size(); ++j, ++touched) {
        if (std::isnan(option[j])) option[j] = payoff(stock[j]);
    }
    const double b = factors.disc;
    for (int k = n - 1; k >= 0; --k) {
        const auto& q = schedule[static_cast<std::size_t>(k)];
        const std::uint64_t first = (pow3(k) - 1) / 2;
        const std::uint64_t last = (pow3(k + 1) - 1) / 2;
        for (std::uint64_t i = first; i < last; ++i, ++touched) {
            option[i] = b * (q.q_down * option[3 * i + 1] + q.q_mid * option[3 * i + 2] +
                             q.q_up * option[3 * i + 3]);
        }
    }
    return finish(option[0], Algorithm::Trinomial, touched, start);
}

PriceResult price_recursive_binomial(const MarketParams& params, const MoveFactors& factors,
                                     const ExpiryLaw& law, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_inputs(params, factors, law);
    check_guard("recursive binomial", params.steps, kRecursiveMaxSteps);
    const auto schedule = period_schedule(factors, law);
    BinomialRecursion recursion(params, factors, schedule, payoff);
    const double value = recursion.value(params.spot);
    return finish(value, Algorithm::RecursiveBinomial, recursion.work(), start);
}

PriceResult price_recombining(const MarketParams& params, const MoveFactors& factors,
                              const ExpiryLaw& law, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_inputs(params, factors, law);
    const int n = params.steps;
    const auto schedule = period_schedule(factors, law);
    const double s0 = params.spot;
    const double u = factors.up;
    const double d = factors.down;
    const double b = factors.disc;

    // Level k starts at k(k+1)/2; node i counts up-moves. The down child of
    // (k, i) is (k+1, i) and the up child (k+1, i+1).
    const auto level = [](std::size_t k) { return k * (k + 1) / 2; };
    std::vector<double> value(static_cast<std::size_t>(n) * (n + 3) / 2 + 1);
    std::uint64_t touched = 0;
    const auto nn = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i <= nn; ++i, ++touched) {
        value[level(nn) + i] = payoff(s0 * std::pow(u, i) * std::pow(d, nn - i));
    }
    for (std::size_t k = nn; k-- > 0;) {
        const auto& q = schedule[k];
        const std::size_t base = level(k);
        for (std::size_t i = 0; i <= k; ++i, ++touched) {
            const double s = s0 * std::pow(u, i) * std::pow(d, k - i);
            value[base + i] = b * q.q_down * value[base + i + k + 1] + q.q_mid * payoff(s) +
                              b * q.q_up * value[base + i + k + 2];
        }
    }
    return finish(value[0], Algorithm::Recombining, touched, start);
}

std::vector<double> conditional_prices(const MarketParams& params, const MoveFactors& factors,
                                       const PayoffSpec& payoff) {
    check_lattice(params, factors);
    const int n = params.steps;
    const double qu = factors.binomial_up();
    const double qd = factors.binomial_down();
    // Forward propagation of the k-step binomial distribution of up-move counts.
    std::vector<double> dist{1.0};
    std::vector<double> prices(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            std::vector<double> next(dist.size() + 1, 0.0);
            for (std::size_t i = 0; i < dist.size(); ++i) {
                next[i] += dist[i] * qd;
                next[i + 1] += dist[i] * qu;
            }
            dist = std::move(next);
        }
        double expectation = 0.0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            const double s = params.spot * std::pow(factors.up, i) * std::pow(factors.down, k - static_cast<int>(i));
            expectation += dist[i] * payoff(s);
        }
        prices[static_cast<std::size_t>(k)] = std::exp(-params.rate * k * factors.dt) * expectation;
    }
    return prices;
}

PriceResult price_conditioning_sum(const MarketParams& params, const MoveFactors& factors,
                                   const ExpiryLaw& law, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_inputs(params, factors, law);
    const auto per_k = conditional_prices(params, factors, payoff);
    const auto pmf = law.pmf();
    double value = 0.0;
    for (std::size_t k = 0; k < per_k.size(); ++k) value += pmf[k] * per_k[k];
    const auto n = static_cast<std::uint64_t>(params.steps);
    return finish(value, Algorithm::ConditioningSum, (n + 1) * (n + 2) / 2, start);
}

EnumerationResult price_path_enumeration(const MarketParams& params, const MoveFactors& factors,
                                         const ExpiryLaw& law, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_inputs(params, factors, law);
    check_guard("path enumeration", params.steps, kEnumerationMaxSteps);
    const int n = params.steps;
    const auto schedule = period_schedule(factors, law);
    const std::uint64_t count = pow3(n);

    EnumerationResult result;
    result.paths.reserve(count);
    // Neumaier-compensated: the oracle must not lose digits over 3^N terms.
    double value = 0.0;
    double compensation = 0.0;
    for (std::uint64_t id = 0; id < count; ++id) {
        PathRecord rec;
        rec.moves.resize(static_cast<std::size_t>(n));
        rec.probability = 1.0;
        rec.expiry_period = n;
        double s = params.spot;
        double s_at_expiry = 0.0;
        std::uint64_t digits = id;
        for (int k = 0; k < n; ++k, digits /= 3) {
            const auto move = static_cast<Move>(digits % 3);
            rec.moves[static_cast<std::size_t>(k)] = move;
            const auto& q = schedule[static_cast<std::size_t>(k)];
            switch (move) {
            case Move::Down: rec.probability *= q.q_down; break;
            case Move::Mid: rec.probability *= q.q_mid; break;
            case Move::Up: rec.probability *= q.q_up; break;
            }
            if (move == Move::Mid && rec.expiry_period == n) {
                rec.expiry_period = k;
                s_at_expiry = s;
            }
            s *= move == Move::Down ? factors.down : move == Move::Mid ? factors.mid : factors.up;
        }
        if (rec.expiry_period == n) s_at_expiry = s;
        rec.discounted_payoff =
            std::exp(-params.rate * rec.expiry_period * factors.dt) * payoff(s_at_expiry);
        const double term = rec.probability * rec.discounted_payoff;
        const double sum = value + term;
        compensation += std::abs(value) >= std::abs(term) ? (value - sum) + term : (term - sum) + value;
        value = sum;
        result.paths.push_back(std::move(rec));
    }
    result.price = finish(value + compensation, Algorithm::PathEnumeration, count, start);
    return result;
}

double price_zsc_closed_form(const MarketParams& params, const ExpiryLaw& law) {
    params.validate();
    if (law.steps() != params.steps) throw Error(ErrorCode::InvalidLaw, "expiry law / lattice step mismatch");
    return params.spot * discount_mgf(law, params.div_yield, params.dt());
}

PriceRange price_range(const MarketParams& params, const MoveFactors& factors, const PayoffSpec& payoff) {
    PriceRange range;
    range.per_k_prices = conditional_prices(params, factors, payoff);
    const auto [lo, hi] = std::minmax_element(range.per_k_prices.begin(), range.per_k_prices.end());
    range.low = *lo;
    range.high = *hi;
    range.degenerate = range.high - range.low <= 1e-12 * std::max(1.0, std::abs(range.high));
    return range;
}

PriceResult price_general_tree(const MarketParams& params, const MoveFactors& factors,
                               const HazardFn& hazard_fn, const PayoffSpec& payoff) {
    const auto start = Clock::now();
    check_lattice(params, factors);
    check_guard("general tree", params.steps, kGeneralTreeMaxSteps);
    const int n = params.steps;
    const auto schedule = general_probs(factors, n, hazard_fn);
    const double s0 = params.spot;
    const double b = factors.disc;

    const auto spot_at = [&](int k, std::size_t node) {
        const int ups = std::popcount(node);
        return s0 * std::pow(factors.up, ups) * std::pow(factors.down, k - ups);
    };

    std::vector<double> value(std::size_t{1} << n);
    std::uint64_t touched = 0;
    for (std::size_t p = 0; p < value.size(); ++p, ++touched) value[p] = payoff(spot_at(n, p));
    // In place: node p reads children 2p and 2p+1, which are >= p.
    for (int k = n - 1; k >= 0; --k) {
        const std::size_t width = std::size_t{1} << k;
        for (std::size_t p = 0; p < width; ++p, touched += 2) {
            const auto& q = schedule.at(k, p);
            const double down = value[2 * p];
            const double up = value[2 * p + 1];
            value[p] = b * q.q_down * down + q.q_mid * payoff(spot_at(k, p)) + b * q.q_up * up;
        }
    }
    return finish(value[0], Algorithm::GeneralTree, touched, start);
}

PriceResult price_with(Algorithm algo, const MarketParams& params, const MoveFactors& factors,
                       const ExpiryLaw& law, const PayoffSpec& payoff) {
    switch (algo) {
    case Algorithm::Trinomial: return price_trinomial(params, factors, law, payoff);
    case Algorithm::RecursiveBinomial: return price_recursive_binomial(params, factors, law, payoff);
    case Algorithm::Recombining: return price_recombining(params, factors, law, payoff);
    case Algorithm::ConditioningSum: return price_conditioning_sum(params, factors, law, payoff);
    case Algorithm::PathEnumeration: return price_path_enumeration(params, factors, law, payoff).price;
    case Algorithm::GeneralTree: {
        const auto hazards = law.hazards();
        if (law.steps() != params.steps) throw Error(ErrorCode::InvalidLaw, "expiry law / lattice step mismatch");
        for (double h : hazards) {
            if (h >= 1.0) throw Error(ErrorCode::InvalidHazard, "general tree needs hazards < 1");
        }
        return price_general_tree(
            params, factors,
            [&hazards](int k, std::span<const Move>) { return hazards[static_cast<std::size_t>(k)]; }, payoff);
    }
    }
    throw Error(ErrorCode::InvalidParams, "unknown algorithm");
}

std::uint64_t expected_nodes_touched(Algorithm algo, int steps) {
    const auto n = static_cast<std::uint64_t>(steps);
    switch (algo) {
    case Algorithm::Trinomial: return (pow3(steps + 1) - 1) / 2;
    case Algorithm::RecursiveBinomial:
    case Algorithm::GeneralTree: return 3 * (std::uint64_t{1} << n) - 2;
    case Algorithm::Recombining: return n * (n + 3) / 2 + 1;
    case Algorithm::ConditioningSum: return (n + 1) * (n + 2) / 2;
    case Algorithm::PathEnumeration: return pow3(steps);
    }
    return 0;
}

}  // namespace reopt
