#include "reopt/continuum.hpp"

#include "reopt/error.hpp"
#include "reopt/format.hpp"
#include "reopt/parallel.hpp"
#include "reopt/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reopt {

namespace {

constexpr std::uint64_t kBlockPaths = 4096;
constexpr double kZ99 = 2.576;

// Mergeable running moments (Chan et al.).
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }

    static Moments merge(const Moments& a, const Moments& b) {
        if (a.count == 0.0) return b;
        if (b.count == 0.0) return a;
        Moments out;
        out.count = a.count + b.count;
        const double delta = b.mean - a.mean;
        out.mean = a.mean + delta * (b.count / out.count);
        out.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / out.count);
        return out;
    }
};

// Fixed-shape pairwise reduction: the tree depends only on the block count.
Moments reduce(std::span<const Moments> blocks) {
    if (blocks.empty()) return {};
    if (blocks.size() == 1) return blocks[0];
    const std::size_t half = blocks.size() / 2;
    return Moments::merge(reduce(blocks.first(half)), reduce(blocks.subspan(half)));
}

}  // namespace

double sample_expiry(const ContinuousExpiry& cont, CounterRng& rng) {
    const double u = rng.uniform();
    if (const auto* e = std::get_if<ExponentialWithAtom>(&cont)) {
        // P(-log(1-U)/lambda >= T) = exp(-lambda T) is the atom at T.
        const double t = -std::log1p(-u) / e->lambda;
        return t < e->horizon ? t : e->horizon;
    }
    if (const auto* pm = std::get_if<PointMass>(&cont)) return pm->time;

    const auto& g = std::get<GenericDensity>(cont);
    const double below_horizon =
        g.cdf(std::nextafter(g.horizon, -std::numeric_limits<double>::infinity()));
    if (u > below_horizon) return g.horizon;
    double lo = 0.0;
    double hi = g.horizon;
    for (int i = 0; i < 100 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g.cdf(mid) >= u ? hi : lo) = mid;
    }
    return hi;
}

McEstimate mc_price(const GbmParams& params, const ContinuousExpiry& cont, const PayoffSpec& payoff,
                    const McConfig& cfg) {
    validate(cont);
    if (cfg.n_paths < 2) throw Error(ErrorCode::InvalidParams, "need at least 2 Monte-Carlo paths");
    if (cfg.time_grid < 1) throw Error(ErrorCode::InvalidParams, "time_grid must be >= 1");
    if (!(params.spot > 0.0 && params.sigma > 0.0 && params.rate >= 0.0 && params.div_yield >= 0.0)) {
        throw Error(ErrorCode::InvalidParams, "invalid diffusion parameters");
    }
    if (!payoff.is_bounded() && !cfg.force_unbounded) {
        throw Error(ErrorCode::UnboundedPayoff,
                    "payoff '" + payoff.name() + "' is unbounded; the limit result needs a bounded f (force to override)");
    }

    const double drift = params.rate - params.div_yield - 0.5 * params.sigma * params.sigma;
    const auto discounted = [&](double tau, double z) {
        const double s = params.spot * std::exp(drift * tau + params.sigma * std::sqrt(tau) * z);
        return std::exp(-params.rate * tau) * payoff(s);
    };
    const auto simulate = [&](std::uint64_t path) {
        CounterRng rng(cfg.seed, path);
        const double tau = sample_expiry(cont, rng);
        const double z = rng.normal();
        if (!cfg.antithetic) return discounted(tau, z);
        return 0.5 * (discounted(tau, z) + discounted(tau, -z));
    };

    const std::uint64_t n_blocks = (cfg.n_paths + kBlockPaths - 1) / kBlockPaths;
    std::vector<Moments> blocks(n_blocks);
    parallel_for(n_blocks, cfg.workers, [&](std::size_t b) {
        const std::uint64_t end = std::min(cfg.n_paths, (b + 1) * kBlockPaths);
        Moments m;
        for (std::uint64_t i = b * kBlockPaths; i < end; ++i) m.add(simulate(i));
        blocks[b] = m;
    });

    const Moments total = reduce(blocks);
    McEstimate est;
    est.n_paths = cfg.n_paths;
    est.mean = total.mean;
    est.std_error = std::sqrt(total.m2 / (total.count - 1.0) / total.count);
    est.ci99_low = est.mean - kZ99 * est.std_error;
    est.ci99_high = est.mean + kZ99 * est.std_error;
    return est;
}

std::vector<ConvergenceRow> convergence_study(const MarketParams& params, const ContinuousExpiry& cont,
                                              const PayoffSpec& payoff, std::span<const int> steps_list,
                                              const McConfig& cfg, FactorStyle style) {
    if (steps_list.empty()) throw Error(ErrorCode::InvalidParams, "steps list is empty");
    if (!std::is_sorted(steps_list.begin(), steps_list.end())) {
        throw Error(ErrorCode::InvalidParams, "steps list must be sorted ascending");
    }
    const McEstimate mc = mc_price(gbm_of(params), cont, payoff, cfg);
    const double horizon = horizon_of(cont);

    std::vector<ConvergenceRow> rows;
    rows.reserve(steps_list.size());
    for (int n : steps_list) {
        const ExpiryLaw law = discretize(cont, n, DiscretizeMode::Floor);
        MarketParams lattice = params;
        lattice.maturity = horizon;
        lattice.steps = law.steps();
        const MoveFactors factors = make_factors(lattice, style);
        const double tree = price_recombining(lattice, factors, law, payoff).value;
        rows.push_back({n, tree, mc.mean, mc.std_error, std::abs(tree - mc.mean)});
    }
    return rows;
}

void write_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
    os << "n,tree_price,mc_mean,mc_se,abs_diff\n";
    for (const auto& r : rows) {
        os << r.n << ',' << csv_number(r.tree_price) << ',' << csv_number(r.mc_mean) << ','
           << csv_number(r.mc_se) << ',' << csv_number(r.abs_diff) << '\n';
    }
}

}  // namespace reopt
