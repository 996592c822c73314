#include "reopt/bench.hpp"

#include "reopt/error.hpp"
#include "reopt/expiry.hpp"
#include "reopt/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace reopt {

std::vector<BenchRow> run_bench(const MarketParams& params_template, double lambda, const PayoffSpec& payoff,
                                std::span<const int> n_list, int reps) {
    if (reps < 1) throw Error(ErrorCode::InvalidParams, "reps must be >= 1");
    constexpr Algorithm kAlgos[] = {Algorithm::Trinomial, Algorithm::RecursiveBinomial, Algorithm::Recombining};

    std::vector<BenchRow> rows;
    for (int n : n_list) {
        MarketParams params = params_template;
        params.steps = n;
        const MoveFactors factors = make_factors(params);
        const double hazard = lambda * params.dt();
        if (!(hazard > 0.0 && hazard < 1.0)) {
            throw Error(ErrorCode::InvalidParams, "lambda * dt must lie in (0, 1)");
        }
        const ExpiryLaw law = geometric_law(hazard, n);
        for (Algorithm algo : kAlgos) {
            const PriceResult warm = price_with(algo, params, factors, law, payoff);
            double sink = warm.value;
            std::chrono::nanoseconds total{0};
            for (int r = 0; r < reps; ++r) {
                const auto start = std::chrono::steady_clock::now();
                const PriceResult res = price_with(algo, params, factors, law, payoff);
                total += std::chrono::steady_clock::now() - start;
                sink += res.value;
            }
            // Keeps the timed calls observable.
            if (!std::isfinite(sink)) throw Error(ErrorCode::NonFinitePayoff, "benchmark produced a non-finite price");
            const double mean = std::max(1.0, static_cast<double>(total.count()) / reps);
            rows.push_back({n, algo, mean, reps, warm.nodes_touched});
        }
    }
    return rows;
}

void write_csv(std::ostream& os, std::span<const BenchRow> rows) {
    os << "n_steps,algo,mean_ns,reps,nodes_touched\n";
    for (const auto& r : rows) {
        os << r.n_steps << ',' << to_string(r.algo) << ',' << csv_number(r.mean_ns) << ',' << r.reps << ','
           << r.nodes_touched << '\n';
    }
}

}  // namespace reopt
