#include "cli.hpp"

#include "reopt/bench.hpp"
#include "reopt/continuum.hpp"
#include "reopt/error.hpp"
#include "reopt/format.hpp"
#include "reopt/parallel.hpp"
#include "reopt/pricer.hpp"
#include "reopt/selftest.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace reopt::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepOptions {
    std::string param = "steps";
    double from = 1.0;
    double to = 50.0;
    int points = 0;  // 0: every integer for steps, 21 otherwise
    std::string payoffs = "call,put,zsc,logcontract";
};

struct ConvergeOptions {
    std::vector<int> steps_list{16, 32, 64, 128, 256, 512, 1024};
    std::uint64_t paths = 1'000'000;
    bool antithetic = false;
    bool force = false;
    double cap = 0.0;  // > 0: call payoff capped at cap
};

struct BenchOptions {
    int n_from = 1;
    int n_to = 10;
    int reps = 10;
};

struct ExpiryFlags {
    CLI::Option* lambda = nullptr;
    CLI::Option* exp_atom = nullptr;
    CLI::Option* pmf_file = nullptr;
};

struct Parsed {
    RunConfig cfg;
    SweepOptions sweep;
    ConvergeOptions converge;
    BenchOptions bench;
    SelftestOptions selftest;
    std::string pmf_path;
    double exp_atom_lambda = 0.10;
};

const char* expiry_kind_name(ExpirySpec::Kind k) {
    switch (k) {
    case ExpirySpec::Kind::Intensity: return "intensity";
    case ExpirySpec::Kind::ExpAtom: return "exp_atom";
    case ExpirySpec::Kind::Pmf: return "pmf";
    }
    return "intensity";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

PayoffSpec payoff_named(const std::string& name, double strike) {
    try {
        return parse_payoff(name, strike);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::vector<double> read_pmf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open pmf file '" + path + "'");
    try {
        const auto law = expiry_law_from_json(json::parse(in));
        return {law.pmf().begin(), law.pmf().end()};
    } catch (const json::exception& e) {
        throw UsageError("malformed pmf file '" + path + "': " + e.what());
    }
}

void add_market(CLI::App* sub, Parsed& p, ExpiryFlags& flags) {
    auto& m = p.cfg.market;
    sub->add_option("--steps", m.steps, "tree steps N")->capture_default_str();
    sub->add_option("--maturity", m.maturity, "maturity T in years")->capture_default_str();
    sub->add_option("--spot", m.spot, "spot S0")->capture_default_str();
    sub->add_option("--sigma", m.sigma, "annual volatility")->capture_default_str();
    sub->add_option("--rate", m.rate, "continuous interest rate r")->capture_default_str();
    sub->add_option("--div", m.div_yield, "continuous dividend yield y")->capture_default_str();
    flags.lambda = sub->add_option("--lambda", p.cfg.expiry.lambda, "expiry intensity: q_m = lambda * dt")
                       ->capture_default_str();
    flags.exp_atom = sub->add_option("--exp-atom", p.exp_atom_lambda,
                                     "floor-discretized exponential expiry with atom at T, rate LAMBDA");
    flags.pmf_file = sub->add_option("--pmf-file", p.pmf_path, "JSON file {\"pmf\": [...]} with N+1 entries");
    flags.lambda->excludes(flags.exp_atom)->excludes(flags.pmf_file);
    flags.exp_atom->excludes(flags.pmf_file);
    sub->add_option("--payoff", p.cfg.payoff, "call, put, zsc, logcontract")->capture_default_str();
    sub->add_option("--strike", p.cfg.strike, "strike (reference level for logcontract)")->capture_default_str();
    sub->add_option("--output", p.cfg.output, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--seed", p.cfg.seed, "random seed")->envname("REOPT_SEED")->capture_default_str();
    sub->add_option("--workers", p.cfg.workers, "worker threads (0 = all cores)")->capture_default_str();
    sub->add_flag("--timing", p.cfg.timing, "include wall-clock times (output no longer reproducible)");
}

void resolve_expiry(Parsed& p, const ExpiryFlags& flags) {
    if (flags.pmf_file->count() > 0) {
        p.cfg.expiry.kind = ExpirySpec::Kind::Pmf;
        p.cfg.expiry.pmf = read_pmf_file(p.pmf_path);
    } else if (flags.exp_atom->count() > 0) {
        p.cfg.expiry.kind = ExpirySpec::Kind::ExpAtom;
        p.cfg.expiry.lambda = p.exp_atom_lambda;
    } else {
        p.cfg.expiry.kind = ExpirySpec::Kind::Intensity;
    }
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- price

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const MarketParams& market = cfg.market;
    const MoveFactors factors = make_factors(market);
    const ExpiryLaw law = build_law(cfg);
    const PayoffSpec payoff = payoff_named(cfg.payoff, cfg.strike);

    std::vector<Algorithm> algos;
    const bool all = cfg.algo == "all";
    if (all) {
        algos = {Algorithm::Trinomial, Algorithm::RecursiveBinomial, Algorithm::Recombining,
                 Algorithm::ConditioningSum};
    } else {
        const auto a = parse_algorithm(cfg.algo);
        if (!a || *a == Algorithm::GeneralTree) throw UsageError("unknown --algo '" + cfg.algo + "'");
        algos = {*a};
    }

    struct Row {
        Algorithm algo;
        std::optional<PriceResult> result;
        std::string skipped;
    };
    std::vector<Row> rows;
    for (Algorithm a : algos) {
        try {
            rows.push_back({a, price_with(a, market, factors, law, payoff), {}});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TooLarge || !all) throw;
            rows.push_back({a, std::nullopt, e.what()});
        }
    }
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& r : rows) {
        if (!r.result) continue;
        lo = std::min(lo, r.result->value);
        hi = std::max(hi, r.result->value);
    }
    const double discrepancy = hi >= lo ? hi - lo : 0.0;

    if (cfg.output == "json") {
        json results = json::array();
        for (const auto& r : rows) {
            json row{{"algo", to_string(r.algo)}};
            if (r.result) {
                row["value"] = r.result->value;
                row["nodes_touched"] = r.result->nodes_touched;
                if (cfg.timing) row["wall_ns"] = r.result->wall_time.count();
            } else {
                row["skipped"] = r.skipped;
            }
            results.push_back(row);
        }
        json doc{{"config", to_json(cfg)}, {"results", results}};
        if (all) doc["max_discrepancy"] = discrepancy;
        write_json(out, doc);
    } else {
        out << "algo,value,nodes_touched,status" << (cfg.timing ? ",wall_ns" : "") << '\n';
        for (const auto& r : rows) {
            out << to_string(r.algo) << ',';
            if (r.result) {
                out << csv_number(r.result->value) << ',' << r.result->nodes_touched << ",ok";
                if (cfg.timing) out << ',' << r.result->wall_time.count();
            } else {
                out << ",,skipped";
                if (cfg.timing) out << ',';
            }
            out << '\n';
        }
        if (all) out << "max_discrepancy," << csv_number(discrepancy) << ",," << (cfg.timing ? ",\n" : "\n");
    }
    if (all && discrepancy > 1e-8) {
        err << "algorithms disagree: max discrepancy " << discrepancy << " > 1e-8\n";
        return kTestFailure;
    }
    return kOk;
}

// ---------------------------------------------------------------- range

int cmd_range(const RunConfig& cfg, std::ostream& out) {
    const MoveFactors factors = make_factors(cfg.market);
    const ExpiryLaw law = build_law(cfg);
    const PayoffSpec payoff = payoff_named(cfg.payoff, cfg.strike);
    const PriceRange range = price_range(cfg.market, factors, payoff);
    const double price = price_recombining(cfg.market, factors, law, payoff).value;

    if (cfg.output == "json") {
        write_json(out, {{"config", to_json(cfg)},
                         {"price", price},
                         {"low", range.low},
                         {"high", range.high},
                         {"degenerate", range.degenerate},
                         {"per_k_prices", range.per_k_prices}});
        return kOk;
    }
    out << "k,conditional_price\n";
    for (std::size_t k = 0; k < range.per_k_prices.size(); ++k) {
        out << k << ',' << csv_number(range.per_k_prices[k]) << '\n';
    }
    out << "low," << csv_number(range.low) << '\n';
    out << "high," << csv_number(range.high) << '\n';
    out << "degenerate," << (range.degenerate ? 1 : 0) << '\n';
    out << "price," << csv_number(price) << '\n';
    return kOk;
}

// ---------------------------------------------------------------- sweep

std::vector<double> sweep_grid(const SweepOptions& s) {
    if (s.param != "steps" && s.param != "spot" && s.param != "lambda") {
        throw UsageError("--param must be steps, spot or lambda");
    }
    if (!(s.to >= s.from)) throw UsageError("sweep needs --to >= --from");
    std::vector<double> grid;
    if (s.param == "steps") {
        if (s.from < 1 || s.from != std::floor(s.from) || s.to != std::floor(s.to)) {
            throw UsageError("steps sweep needs integer bounds >= 1");
        }
        const int count = s.points > 0 ? s.points : static_cast<int>(s.to - s.from) + 1;
        for (int i = 0; i < count; ++i) {
            const double v = count == 1 ? s.from : std::round(s.from + i * (s.to - s.from) / (count - 1));
            if (!grid.empty() && v == grid.back()) throw UsageError("steps grid has duplicate points");
            grid.push_back(v);
        }
        return grid;
    }
    const int count = s.points > 0 ? s.points : 21;
    for (int i = 0; i < count; ++i) {
        grid.push_back(count == 1 ? s.from : s.from + i * (s.to - s.from) / (count - 1));
    }
    return grid;
}

int cmd_sweep(const RunConfig& cfg, const SweepOptions& s, std::ostream& out) {
    const auto grid = sweep_grid(s);
    std::vector<PayoffSpec> payoffs;
    for (const auto& name : split(s.payoffs, ',')) payoffs.push_back(payoff_named(name, cfg.strike));
    if (payoffs.empty()) throw UsageError("--payoffs is empty");
    if (cfg.expiry.kind == ExpirySpec::Kind::Pmf && s.param != "spot") {
        throw UsageError("a pmf file fixes N and the law; sweep spot instead");
    }

    // Validate every grid point up front so usage errors are not reported
    // from inside the worker pool.
    std::vector<RunConfig> points(grid.size(), cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& c = points[i];
        if (s.param == "steps") c.market.steps = static_cast<int>(grid[i]);
        if (s.param == "spot") c.market.spot = grid[i];
        if (s.param == "lambda") c.expiry.lambda = grid[i];
        build_law(c);
    }

    std::vector<std::vector<double>> prices(grid.size());
    parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
        const auto& c = points[i];
        const MoveFactors f = make_factors(c.market);
        const ExpiryLaw law = build_law(c);
        for (const auto& p : payoffs) prices[i].push_back(price_recombining(c.market, f, law, p).value);
    });

    if (cfg.output == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t j = 0; j < payoffs.size(); ++j) {
                rows.push_back({{"param_value", grid[i]}, {"payoff", payoffs[j].name()}, {"price", prices[i][j]}});
            }
        }
        write_json(out, {{"config", to_json(cfg)}, {"param", s.param}, {"rows", rows}});
        return kOk;
    }
    out << "param_value,payoff,price\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < payoffs.size(); ++j) {
            out << csv_number(grid[i]) << ',' << payoffs[j].name() << ',' << csv_number(prices[i][j]) << '\n';
        }
    }
    return kOk;
}

// ---------------------------------------------------------------- converge

int cmd_converge(const RunConfig& cfg, const ConvergeOptions& c, std::ostream& out) {
    if (cfg.expiry.kind == ExpirySpec::Kind::Pmf) {
        throw UsageError("converge needs a continuous expiry law (--lambda or --exp-atom)");
    }
    PayoffSpec payoff = payoff_named(cfg.payoff, cfg.strike);
    if (c.cap > 0.0) {
        if (cfg.payoff != "call") throw UsageError("--cap applies to the call payoff only");
        const double strike = cfg.strike;
        const double cap = c.cap;
        payoff = PayoffSpec::custom([strike, cap](double s) { return std::clamp(s - strike, 0.0, cap); }, true,
                                    "capped_call");
    }
    const ContinuousExpiry cont = ExponentialWithAtom{cfg.expiry.lambda, cfg.market.maturity};
    McConfig mc;
    mc.n_paths = c.paths;
    mc.seed = cfg.seed;
    mc.antithetic = c.antithetic;
    mc.force_unbounded = c.force;
    mc.workers = cfg.workers;
    const auto rows = convergence_study(cfg.market, cont, payoff, c.steps_list, mc);

    if (cfg.output == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"n", r.n},
                           {"tree_price", r.tree_price},
                           {"mc_mean", r.mc_mean},
                           {"mc_se", r.mc_se},
                           {"abs_diff", r.abs_diff}});
        }
        write_json(out, {{"config", to_json(cfg)}, {"mc_paths", c.paths}, {"rows", arr}});
        return kOk;
    }
    write_csv(out, rows);
    return kOk;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const RunConfig& cfg, const BenchOptions& b, std::ostream& out) {
    if (b.n_from < 1 || b.n_to < b.n_from) throw UsageError("bench needs 1 <= --n-from <= --n-to");
    if (cfg.expiry.kind != ExpirySpec::Kind::Intensity) throw UsageError("bench uses the intensity expiry only");
    std::vector<int> n_list;
    for (int n = b.n_from; n <= b.n_to; ++n) n_list.push_back(n);
    const auto rows = run_bench(cfg.market, cfg.expiry.lambda, payoff_named(cfg.payoff, cfg.strike), n_list, b.reps);
    if (cfg.output == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"n_steps", r.n_steps},
                           {"algo", to_string(r.algo)},
                           {"mean_ns", r.mean_ns},
                           {"reps", r.reps},
                           {"nodes_touched", r.nodes_touched}});
        }
        write_json(out, {{"config", to_json(cfg)}, {"rows", arr}});
        return kOk;
    }
    write_csv(out, rows);
    return kOk;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest(const RunConfig& cfg, SelftestOptions opts, std::ostream& out) {
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    const SelftestReport report = run_selftest(opts);
    if (cfg.output == "json") {
        write_json(out, {{"cases", report.cases},
                         {"consistent", report.consistent},
                         {"max_discrepancy", report.max_discrepancy},
                         {"tolerance", report.tolerance},
                         {"enum_cases", report.enum_cases},
                         {"enum_passed", report.enum_passed},
                         {"enum_max_error", report.enum_max_error},
                         {"enum_tolerance", report.enum_tolerance},
                         {"failures", report.failures},
                         {"ok", report.ok()}});
    } else {
        print_report(out, report);
    }
    return report.ok() ? kOk : kTestFailure;
}

}  // namespace

// ---------------------------------------------------------------- config

json to_json(const RunConfig& cfg) {
    const auto& m = cfg.market;
    json expiry{{"kind", expiry_kind_name(cfg.expiry.kind)}};
    if (cfg.expiry.kind == ExpirySpec::Kind::Pmf) {
        expiry["pmf"] = cfg.expiry.pmf;
    } else {
        expiry["lambda"] = cfg.expiry.lambda;
    }
    return {{"command", cfg.command},
            {"market",
             {{"steps", m.steps},
              {"maturity", m.maturity},
              {"spot", m.spot},
              {"sigma", m.sigma},
              {"rate", m.rate},
              {"div", m.div_yield}}},
            {"expiry", expiry},
            {"payoff", {{"name", cfg.payoff}, {"strike", cfg.strike}}},
            {"algo", cfg.algo},
            {"seed", cfg.seed}};
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    cfg.command = j.at("command").get<std::string>();
    const auto& m = j.at("market");
    cfg.market.steps = m.at("steps").get<int>();
    cfg.market.maturity = m.at("maturity").get<double>();
    cfg.market.spot = m.at("spot").get<double>();
    cfg.market.sigma = m.at("sigma").get<double>();
    cfg.market.rate = m.at("rate").get<double>();
    cfg.market.div_yield = m.at("div").get<double>();
    const auto& e = j.at("expiry");
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "pmf") {
        cfg.expiry.kind = ExpirySpec::Kind::Pmf;
        cfg.expiry.pmf = e.at("pmf").get<std::vector<double>>();
    } else {
        cfg.expiry.kind = kind == "exp_atom" ? ExpirySpec::Kind::ExpAtom : ExpirySpec::Kind::Intensity;
        cfg.expiry.lambda = e.at("lambda").get<double>();
    }
    cfg.payoff = j.at("payoff").at("name").get<std::string>();
    cfg.strike = j.at("payoff").at("strike").get<double>();
    cfg.algo = j.at("algo").get<std::string>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

ExpiryLaw build_law(const RunConfig& cfg) {
    const MarketParams& m = cfg.market;
    try {
        m.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    switch (cfg.expiry.kind) {
    case ExpirySpec::Kind::Intensity: {
        const double hazard = cfg.expiry.lambda * m.dt();
        if (!(cfg.expiry.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
        if (!(hazard < 1.0)) {
            std::ostringstream os;
            os << "λ·Δt must be < 1 (lambda*dt = " << hazard << ")";
            throw UsageError(os.str());
        }
        return law_from_hazards(std::vector<double>(static_cast<std::size_t>(m.steps), hazard));
    }
    case ExpirySpec::Kind::ExpAtom: {
        const double per_unit = m.steps / m.maturity;
        if (std::abs(per_unit - std::round(per_unit)) > 1e-9 * per_unit) {
            throw UsageError("--exp-atom needs steps / maturity to be an integer");
        }
        try {
            return discretize(ExponentialWithAtom{cfg.expiry.lambda, m.maturity},
                              static_cast<int>(std::round(per_unit)), DiscretizeMode::Floor);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    case ExpirySpec::Kind::Pmf: {
        if (static_cast<int>(cfg.expiry.pmf.size()) != m.steps + 1) {
            throw UsageError("pmf has " + std::to_string(cfg.expiry.pmf.size()) + " entries; --steps " +
                             std::to_string(m.steps) + " needs " + std::to_string(m.steps + 1));
        }
        return ExpiryLaw(cfg.expiry.pmf);
    }
    }
    throw UsageError("no expiry law given");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Parsed p;
    CLI::App app{"Random-expiry option pricing on trinomial trees"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        ExpiryFlags flags;
    };
    std::vector<Sub> subs;
    const auto add = [&](const char* name, const char* help) -> CLI::App* {
        CLI::App* sub = app.add_subcommand(name, help);
        subs.push_back({sub, {}});
        add_market(sub, p, subs.back().flags);
        return sub;
    };

    auto* price = add("price", "price an RE option");
    price->add_option("--algo", p.cfg.algo, "tri, recursive, reco, sum, enum or all")->capture_default_str();
    add("range", "fixed-expiry price hull over all expiry laws");
    auto* sweep = add("sweep", "price the standard payoffs over a parameter grid");
    sweep->add_option("--param", p.sweep.param, "steps, spot or lambda")->capture_default_str();
    sweep->add_option("--from", p.sweep.from)->capture_default_str();
    sweep->add_option("--to", p.sweep.to)->capture_default_str();
    sweep->add_option("--points", p.sweep.points, "grid size (default: all integers for steps, else 21)");
    sweep->add_option("--payoffs", p.sweep.payoffs, "comma-separated payoff names")->capture_default_str();
    auto* converge = add("converge", "tree prices vs Monte-Carlo continuous-time limit");
    converge->add_option("--steps-list", p.converge.steps_list, "periods per unit time, ascending")
        ->delimiter(',')
        ->capture_default_str();
    converge->add_option("--paths", p.converge.paths, "Monte-Carlo paths")->capture_default_str();
    converge->add_flag("--antithetic", p.converge.antithetic, "antithetic normal draws");
    converge->add_flag("--force", p.converge.force, "allow unbounded payoffs");
    converge->add_option("--cap", p.converge.cap, "cap the call payoff at this level (bounded)");
    auto* bench = add("bench", "time the trinomial, recursive and recombining pricers over N");
    bench->add_option("--n-from", p.bench.n_from)->capture_default_str();
    bench->add_option("--n-to", p.bench.n_to)->capture_default_str();
    bench->add_option("--reps", p.bench.reps)->capture_default_str();
    auto* selftest = add("selftest", "randomized cross-algorithm and oracle checks");
    selftest->add_option("--cases", p.selftest.cases)->capture_default_str();
    selftest->add_option("--enum-cases", p.selftest.enum_cases)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const auto it = std::find_if(subs.begin(), subs.end(), [](const Sub& s) { return s.app->parsed(); });
        p.cfg.command = it->app->get_name();
        resolve_expiry(p, it->flags);
        const RunConfig& cfg = p.cfg;
        if (cfg.command == "price") return cmd_price(cfg, out, err);
        if (cfg.command == "range") return cmd_range(cfg, out);
        if (cfg.command == "sweep") return cmd_sweep(cfg, p.sweep, out);
        if (cfg.command == "converge") return cmd_converge(cfg, p.converge, out);
        if (cfg.command == "bench") return cmd_bench(cfg, p.bench, out);
        return cmd_selftest(cfg, p.selftest, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::TooLarge ? kGuard : kUsage;
    }
}

}  // namespace reopt::cli
