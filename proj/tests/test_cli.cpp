#include "cli.hpp"

#include "reopt/pricer.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace reopt;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

// payoff -> prices in row order
std::map<std::string, std::vector<double>> sweep_columns(const std::string& csv) {
    std::map<std::string, std::vector<double>> cols;
    const auto rows = csv_rows(csv);
    REQUIRE(rows.at(0) == std::vector<std::string>{"param_value", "payoff", "price"});
    for (std::size_t i = 1; i < rows.size(); ++i) cols[rows[i][1]].push_back(std::stod(rows[i][2]));
    return cols;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << contents;
    return path;
}

}  // namespace

TEST_CASE("zero-strike call with zero yield prices at spot") {
    const auto r = run({"price", "--payoff", "zsc", "--div", "0", "--spot", "87.5", "--output", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j["results"][0]["value"].get<double>() - 87.5) <= 1e-10);
}

TEST_CASE("price --algo all at the defaults") {
    const auto r = run({"price", "--algo", "all", "--steps", "12"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"algo", "value", "nodes_touched", "status"});
    CHECK(rows[1][0] == "tri");
    CHECK(rows[4][0] == "sum");
    CHECK(rows[5][0] == "max_discrepancy");
    CHECK(std::stod(rows[5][1]) < 1e-9);

    const auto defaults = run({"price", "--algo", "all", "--output", "json"});
    REQUIRE(defaults.code == 0);
    const auto j = json::parse(defaults.out);
    CHECK(j["results"].size() == 4);
    CHECK(j["results"][0].contains("skipped"));  // the trinomial guard excludes N = 20
    CHECK(j["max_discrepancy"].get<double>() < 1e-9);
    CHECK(j["config"]["market"]["steps"] == 20);
    CHECK(j["config"]["expiry"]["lambda"] == 0.10);
}

TEST_CASE("usage and guard errors") {
    auto r = run({"price", "--lambda", "25", "--steps", "20", "--maturity", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("λ·Δt must be < 1") != std::string::npos);

    r = run({"price", "--algo", "tri", "--steps", "20"});
    CHECK(r.code == 3);
    CHECK(r.err.find("trinomial guard") != std::string::npos);
    r = run({"price", "--algo", "enum", "--steps", "9"});
    CHECK(r.code == 3);

    CHECK(run({"price", "--algo", "magic"}).code == 2);
    CHECK(run({"price", "--payoff", "straddle"}).code == 2);
    CHECK(run({"price", "--steps", "0"}).code == 2);
    CHECK(run({"price", "--output", "xml"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"price", "--lambda", "0.2", "--exp-atom", "0.2"}).code == 2);
    CHECK(run({"price", "--pmf-file", "/nonexistent/pmf.json"}).code == 2);
    CHECK(run({"sweep", "--param", "sigma"}).code == 2);
    CHECK(run({"converge", "--payoff", "call", "--paths", "100", "--steps-list", "4"}).code == 2);

    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("price") != std::string::npos);
}

TEST_CASE("pmf file expiry") {
    const auto path = temp_file("reopt_cli_pmf.json", R"({"pmf": [0.1, 0.2, 0.3, 0.4]})");
    auto r = run({"price", "--steps", "3", "--pmf-file", path.string(), "--algo", "all", "--output", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["config"]["expiry"]["kind"] == "pmf");
    MarketParams p;
    p.steps = 3;
    const double ref =
        price_conditioning_sum(p, make_factors(p), ExpiryLaw({0.1, 0.2, 0.3, 0.4}), PayoffSpec::call(100)).value;
    CHECK(std::abs(j["results"][2]["value"].get<double>() - ref) <= 1e-12);

    r = run({"price", "--steps", "4", "--pmf-file", path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("needs 5") != std::string::npos);
    const auto bad = temp_file("reopt_cli_bad.json", R"({"pmf": [0.5, 0.6]})");
    CHECK(run({"price", "--steps", "1", "--pmf-file", bad.string()}).code == 2);
    const auto garbage = temp_file("reopt_cli_garbage.json", "not json");
    CHECK(run({"price", "--steps", "1", "--pmf-file", garbage.string()}).code == 2);
}

TEST_CASE("exponential-with-atom expiry flag") {
    const auto r = run({"price", "--exp-atom", "0.3", "--steps", "50", "--output", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["config"]["expiry"]["kind"] == "exp_atom");
    MarketParams p;
    p.steps = 50;
    const auto law = discretize(ExponentialWithAtom{0.3, 1.0}, 50, DiscretizeMode::Floor);
    CHECK(j["results"][0]["value"].get<double>() ==
          price_recombining(p, make_factors(p), law, PayoffSpec::call(100)).value);
}

TEST_CASE("JSON output round-trips through the config") {
    const auto r = run({"price", "--algo", "all", "--steps", "9", "--spot", "104.25", "--sigma", "0.41", "--payoff",
                        "put", "--strike", "97", "--lambda", "0.7", "--output", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    const auto cfg = cli::config_from_json(j["config"]);
    CHECK(cli::to_json(cfg) == j["config"]);
    const auto law = cli::build_law(cfg);
    const auto payoff = parse_payoff(cfg.payoff, cfg.strike);
    const auto f = make_factors(cfg.market);
    for (const auto& row : j["results"]) {
        const auto algo = *parse_algorithm(row["algo"].get<std::string>());
        CHECK(row["value"].get<double>() == price_with(algo, cfg.market, f, law, payoff).value);
    }
}

TEST_CASE("range command") {
    const auto r = run({"range", "--payoff", "zsc", "--steps", "10", "--output", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j["low"].get<double>() - 100 * std::exp(-0.05)) <= 1e-12);
    CHECK(std::abs(j["high"].get<double>() - 100) <= 1e-12);
    CHECK(j["per_k_prices"].size() == 11);
    CHECK(j["price"].get<double>() > j["low"].get<double>());
    CHECK(j["price"].get<double>() < j["high"].get<double>());
    const auto zero = run({"range", "--payoff", "zsc", "--div", "0", "--output", "json"});
    CHECK(json::parse(zero.out)["degenerate"] == true);
}

TEST_CASE("sweep over steps: ZSC is flat without dividends") {
    const auto r = run({"sweep", "--param", "steps", "--from", "1", "--to", "50", "--div", "0"});
    REQUIRE(r.code == 0);
    const auto cols = sweep_columns(r.out);
    REQUIRE(cols.at("zsc").size() == 50);
    for (double v : cols.at("zsc")) CHECK(std::abs(v - 100.0) <= 1e-9);
    CHECK(cols.at("call").size() == 50);
    CHECK(cols.at("logcontract").size() == 50);
}

TEST_CASE("sweep over lambda and spot: comparative statics") {
    const auto lam = sweep_columns(run({"sweep", "--param", "lambda", "--from", "0.01", "--to", "2"}).out);
    for (std::size_t i = 1; i < lam.at("call").size(); ++i) {
        CHECK(lam.at("call")[i] <= lam.at("call")[i - 1]);
        CHECK(lam.at("put")[i] <= lam.at("put")[i - 1]);
        CHECK(lam.at("zsc")[i] >= lam.at("zsc")[i - 1]);
    }
    const auto spot = sweep_columns(run({"sweep", "--param", "spot", "--from", "50", "--to", "150"}).out);
    REQUIRE(spot.at("call").size() == 21);
    for (std::size_t i = 1; i < spot.at("call").size(); ++i) {
        CHECK(spot.at("call")[i] >= spot.at("call")[i - 1]);
        CHECK(spot.at("put")[i] <= spot.at("put")[i - 1]);
    }
    const auto rows = csv_rows(run({"sweep", "--param", "spot", "--from", "50", "--to", "150", "--points", "3",
                                    "--payoffs", "put,call"})
                                   .out);
    REQUIRE(rows.size() == 7);
    CHECK(rows[1][0] == "50");
    CHECK(rows[1][1] == "put");
    CHECK(rows[2][1] == "call");
    CHECK(rows[3][0] == "100");
    // An intensity grid point with lambda * dt >= 1 is a usage error.
    CHECK(run({"sweep", "--param", "lambda", "--from", "1", "--to", "30"}).code == 2);
}

TEST_CASE("byte-identical output across runs and worker counts") {
    const std::vector<std::vector<std::string>> commands{
        {"price", "--algo", "all", "--steps", "10"},
        {"price", "--algo", "all", "--output", "json"},
        {"range", "--payoff", "put"},
        {"sweep", "--param", "spot", "--from", "60", "--to", "140", "--points", "9"},
        {"converge", "--payoff", "put", "--paths", "30000", "--steps-list", "8,32", "--antithetic"},
        {"selftest", "--cases", "40", "--enum-cases", "10"},
    };
    for (const auto& base : commands) {
        auto one = base;
        one.insert(one.end(), {"--workers", "1"});
        auto four = base;
        four.insert(four.end(), {"--workers", "4"});
        const auto a = run(one);
        const auto b = run(one);
        const auto c = run(four);
        INFO(base[0]);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
        CHECK(a.out == c.out);
        CHECK(!a.out.empty());
    }
}

TEST_CASE("seed from the environment") {
    const std::vector<std::string> base{"converge", "--payoff", "put", "--paths", "5000", "--steps-list", "8"};
    auto with_seed = base;
    with_seed.insert(with_seed.end(), {"--seed", "777"});
    const auto explicit_seed = run(with_seed).out;
    ::setenv("REOPT_SEED", "777", 1);
    const auto from_env = run(base).out;
    ::unsetenv("REOPT_SEED");
    const auto default_seed = run(base).out;
    CHECK(explicit_seed == from_env);
    CHECK(explicit_seed != default_seed);
}

TEST_CASE("converge command") {
    auto r = run({"converge", "--payoff", "put", "--paths", "20000", "--steps-list", "16,64"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"n", "tree_price", "mc_mean", "mc_se", "abs_diff"});
    CHECK(rows[1][0] == "16");

    r = run({"converge", "--payoff", "call", "--cap", "80", "--paths", "20000", "--steps-list", "16"});
    CHECK(r.code == 0);
    r = run({"converge", "--payoff", "call", "--force", "--paths", "20000", "--steps-list", "16"});
    CHECK(r.code == 0);
    r = run({"converge", "--payoff", "put", "--paths", "100", "--steps-list", "64,16"});
    CHECK(r.code == 2);
}

TEST_CASE("bench command") {
    const auto r = run({"bench", "--n-from", "1", "--n-to", "4", "--reps", "2"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 13);
    CHECK(rows[0] == std::vector<std::string>{"n_steps", "algo", "mean_ns", "reps", "nodes_touched"});
    CHECK(rows[12][1] == "reco");
    CHECK(rows[12][4] == "15");
    CHECK(run({"bench", "--n-from", "5", "--n-to", "2"}).code == 2);
}

TEST_CASE("selftest command") {
    auto r = run({"selftest", "--cases", "10", "--enum-cases", "5", "--seed", "42"});
    CHECK(r.code == 0);
    CHECK(r.out.find("10/10 consistent, max discrepancy < 1e-09") == 0);
    CHECK(r.out.find("selftest passed") != std::string::npos);
    CHECK(run({"selftest", "--cases", "10", "--enum-cases", "5", "--seed", "42"}).out == r.out);
    r = run({"selftest", "--cases", "10", "--enum-cases", "5", "--output", "json"});
    CHECK(json::parse(r.out)["ok"] == true);
}
