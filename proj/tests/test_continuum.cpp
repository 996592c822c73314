#include "reopt/continuum.hpp"
#include "reopt/error.hpp"
#include "reopt/pricer.hpp"
#include "reopt/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace reopt;

namespace {

using Word4 = std::array<std::uint32_t, 4>;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double black_scholes(double s, double k, double r, double y, double sigma, double t, bool call) {
    const double d1 = (std::log(s / k) + (r - y + 0.5 * sigma * sigma) * t) / (sigma * std::sqrt(t));
    const double d2 = d1 - sigma * std::sqrt(t);
    if (call) return s * std::exp(-y * t) * normal_cdf(d1) - k * std::exp(-r * t) * normal_cdf(d2);
    return k * std::exp(-r * t) * normal_cdf(-d2) - s * std::exp(-y * t) * normal_cdf(-d1);
}

PayoffSpec capped_call(double strike, double cap) {
    return PayoffSpec::custom([=](double s) { return std::clamp(s - strike, 0.0, cap); }, true, "capped_call");
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Word4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Word4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Word4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are reproducible and distinct") {
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    CounterRng c(42, 8);
    CounterRng d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("uniform and normal draws") {
    CounterRng rng(1, 0);
    const int n = 200000;
    double su = 0.0;
    double sn = 0.0;
    double sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        REQUIRE(std::isfinite(z));
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("sample_expiry") {
    CounterRng rng(5, 0);
    for (int i = 0; i < 100; ++i) CHECK(sample_expiry(PointMass{0.42, 1.0}, rng) == 0.42);

    const double lambda = 0.1;
    const double horizon = 1.0;
    const ContinuousExpiry cont = ExponentialWithAtom{lambda, horizon};
    const int n = 1'000'000;
    int at_t = 0;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        CounterRng r(9, static_cast<std::uint64_t>(i));
        const double t = sample_expiry(cont, r);
        REQUIRE(t >= 0.0);
        REQUIRE(t <= horizon);
        at_t += t == horizon;
        sum += t;
        sum2 += t * t;
    }
    const double pi = std::exp(-lambda * horizon);
    CHECK(std::abs(double(at_t) / n - pi) <= 4 * std::sqrt(pi * (1 - pi) / n));
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    // E[min(X, T)] for X ~ Exp(lambda).
    const double expected = (1 - std::exp(-lambda * horizon)) / lambda;
    CHECK(std::abs(mean - expected) <= 4 * sd / std::sqrt(double(n)));

    // Generic CDF: uniform on [0, 2] with an atom of 0.25 at 2.
    const GenericDensity g{[](double t) { return t >= 2.0 ? 1.0 : 0.375 * t; }, 2.0};
    int g_at = 0;
    double g_sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        CounterRng r(10, static_cast<std::uint64_t>(i));
        const double t = sample_expiry(g, r);
        g_at += t == 2.0;
        g_sum += t;
    }
    CHECK(std::abs(g_at / 1e5 - 0.25) <= 4 * std::sqrt(0.25 * 0.75 / 1e5));
    CHECK(std::abs(g_sum / 1e5 - (0.75 * 1.0 + 0.25 * 2.0)) <= 0.01);
}

TEST_CASE("mc_price: constant payoff against the closed form") {
    const GbmParams p;
    const double lambda = 0.1;
    const double c = 3.0;
    McConfig cfg;
    cfg.n_paths = 200000;
    const auto est = mc_price(p, ExponentialWithAtom{lambda, 1.0}, PayoffSpec::custom([c](double) { return c; }, true),
                              cfg);
    const double a = lambda + p.rate;
    const double expected = c * (lambda / a * (1 - std::exp(-a)) + std::exp(-a));
    CHECK(est.std_error > 0.0);
    CHECK(std::abs(est.mean - expected) <= 4 * est.std_error);
    CHECK(est.ci99_low < est.mean);
    CHECK(est.ci99_high > est.mean);
    CHECK(est.ci99_high - est.mean == doctest::Approx(2.576 * est.std_error));
    CHECK(est.n_paths == cfg.n_paths);
}

TEST_CASE("mc_price: fixed maturity put against a fine lattice") {
    const MarketParams market;
    McConfig cfg;
    cfg.n_paths = 400000;
    const auto put = PayoffSpec::put(100);
    const auto est = mc_price(gbm_of(market), PointMass{1.0, 1.0}, put, cfg);
    MarketParams fine = market;
    fine.steps = 2000;
    std::vector<double> at_n(2001, 0.0);
    at_n.back() = 1.0;
    const double tree = price_recombining(fine, make_factors(fine), ExpiryLaw(at_n), put).value;
    CHECK(std::abs(est.mean - tree) <= 4 * est.std_error);
    CHECK(std::abs(tree - black_scholes(100, 100, 0.10, 0.05, 0.30, 1.0, false)) < 5e-3);
}

TEST_CASE("mc_price: low-volatility ZSC with zero yield is the spot") {
    GbmParams p;
    p.div_yield = 0.0;
    p.sigma = 1e-3;
    McConfig cfg;
    cfg.n_paths = 50000;
    cfg.force_unbounded = true;
    const auto est = mc_price(p, ExponentialWithAtom{0.5, 1.0}, PayoffSpec::zero_strike_call(), cfg);
    CHECK(std::abs(est.mean - p.spot) <= 4 * est.std_error);
}

TEST_CASE("mc_price: unbounded payoffs need the force flag") {
    McConfig cfg;
    cfg.n_paths = 100;
    CHECK_THROWS_AS(mc_price(GbmParams{}, PointMass{1.0, 1.0}, PayoffSpec::call(100), cfg), Error);
    try {
        mc_price(GbmParams{}, PointMass{1.0, 1.0}, PayoffSpec::log_contract(100), cfg);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnboundedPayoff);
    }
    cfg.force_unbounded = true;
    CHECK_NOTHROW(mc_price(GbmParams{}, PointMass{1.0, 1.0}, PayoffSpec::call(100), cfg));
    cfg.n_paths = 1;
    CHECK_THROWS_AS(mc_price(GbmParams{}, PointMass{1.0, 1.0}, PayoffSpec::put(100), cfg), Error);
}

TEST_CASE("mc_price is bit-identical across worker counts") {
    McConfig cfg;
    cfg.n_paths = 50'000;  // not a multiple of the block size
    const auto put = PayoffSpec::put(100);
    cfg.workers = 1;
    const auto ref = mc_price(GbmParams{}, ExponentialWithAtom{0.3, 1.0}, put, cfg);
    for (unsigned w : {2u, 3u, 8u}) {
        cfg.workers = w;
        const auto e = mc_price(GbmParams{}, ExponentialWithAtom{0.3, 1.0}, put, cfg);
        CHECK(e.mean == ref.mean);
        CHECK(e.std_error == ref.std_error);
    }
    cfg.seed = 43;
    CHECK(mc_price(GbmParams{}, ExponentialWithAtom{0.3, 1.0}, put, cfg).mean != ref.mean);
}

TEST_CASE("antithetic draws do not inflate the standard error") {
    const std::vector<PayoffSpec> payoffs{PayoffSpec::put(100), capped_call(100, 100),
                                          PayoffSpec::custom([](double) { return 1.0; }, true)};
    for (const auto& payoff : payoffs) {
        McConfig cfg;
        cfg.n_paths = 100000;
        const auto plain = mc_price(GbmParams{}, ExponentialWithAtom{0.1, 1.0}, payoff, cfg);
        cfg.antithetic = true;
        const auto anti = mc_price(GbmParams{}, ExponentialWithAtom{0.1, 1.0}, payoff, cfg);
        INFO(payoff.name());
        CHECK(anti.std_error <= 1.05 * plain.std_error);
        CHECK(std::abs(anti.mean - plain.mean) <= 4 * std::hypot(anti.std_error, plain.std_error) + 1e-12);
    }
}

TEST_CASE("convergence study: unit payoff matches the discounted mgf at every n") {
    const MarketParams market;
    const ContinuousExpiry cont = ExponentialWithAtom{0.1, 1.0};
    const auto one = PayoffSpec::custom([](double) { return 1.0; }, true, "one");
    McConfig cfg;
    cfg.n_paths = 1000;
    const std::vector<int> steps{4, 16, 64, 256};
    const auto rows = convergence_study(market, cont, one, steps, cfg);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        const auto law = discretize(cont, row.n, DiscretizeMode::Floor);
        CHECK(std::abs(row.tree_price - discount_mgf(law, market.rate, 1.0 / row.n)) <= 1e-12);
    }
}

TEST_CASE("convergence study: bounded put converges to the limit") {
    const MarketParams market;
    McConfig cfg;
    cfg.n_paths = 200000;
    const std::vector<int> steps{16, 64, 256};
    const auto rows = convergence_study(market, ExponentialWithAtom{0.1, 1.0}, PayoffSpec::put(100), steps, cfg);
    CHECK(rows.back().abs_diff <= 3 * rows.back().mc_se);
    for (const auto& row : rows) CHECK(row.mc_mean == rows.front().mc_mean);

    std::ostringstream os;
    write_csv(os, rows);
    CHECK(os.str().rfind("n,tree_price,mc_mean,mc_se,abs_diff\n16,", 0) == 0);
}

TEST_CASE("convergence study: fixed maturity call oscillates towards Black-Scholes") {
    const MarketParams market;
    McConfig cfg;
    cfg.n_paths = 1000;
    cfg.force_unbounded = true;
    std::vector<int> steps;
    for (int n = 16; n <= 1024; n *= 2) steps.push_back(n);
    const auto rows = convergence_study(market, PointMass{1.0, 1.0}, PayoffSpec::call(100), steps, cfg);
    const double bs = black_scholes(100, 100, 0.10, 0.05, 0.30, 1.0, true);
    // Error envelope shrinks like 1/n; consecutive errors need not.
    for (const auto& row : rows) CHECK(std::abs(row.tree_price - bs) <= 1.0 / row.n * 4.0);
    CHECK(std::abs(rows.back().tree_price - bs) < std::abs(rows.front().tree_price - bs));
}

TEST_CASE("convergence study rejects unsorted or empty step lists") {
    McConfig cfg;
    cfg.n_paths = 10;
    const std::vector<int> bad{64, 16};
    CHECK_THROWS_AS(convergence_study(MarketParams{}, PointMass{1.0, 1.0}, PayoffSpec::put(100), bad, cfg), Error);
    CHECK_THROWS_AS(convergence_study(MarketParams{}, PointMass{1.0, 1.0}, PayoffSpec::put(100), {}, cfg), Error);
}
