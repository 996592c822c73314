#pragma once

#include "reopt/model.hpp"
#include "reopt/payoff.hpp"
#include "reopt/pricer.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace reopt {

struct BenchRow {
    int n_steps = 0;
    Algorithm algo = Algorithm::Recombining;
    double mean_ns = 0.0;
    int reps = 0;
    std::uint64_t nodes_touched = 0;
};

/// Times the trinomial, recursive and recombining pricers for each N in
/// `n_list` with intensity hazard lambda * dt. Each (algo, N) pair gets one
/// untimed warm-up run followed by `reps` timed runs with identical inputs.
/// Rows are ordered by N, then algorithm (tri, recursive, reco).
std::vector<BenchRow> run_bench(const MarketParams& params_template, double lambda, const PayoffSpec& payoff,
                                std::span<const int> n_list, int reps);

/// Columns n_steps, algo, mean_ns, reps, nodes_touched.
void write_csv(std::ostream& os, std::span<const BenchRow> rows);

}  // namespace reopt
