#pragma once

#include "reopt/expiry.hpp"
#include "reopt/model.hpp"
#include "reopt/payoff.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reopt::cli {

enum ExitCode : int { kOk = 0, kTestFailure = 1, kUsage = 2, kGuard = 3 };

struct ExpirySpec {
    enum class Kind { Intensity, ExpAtom, Pmf };
    Kind kind = Kind::Intensity;
    double lambda = 0.10;
    std::vector<double> pmf;  ///< Kind::Pmf only, loaded from --pmf-file
};

struct RunConfig {
    std::string command;
    MarketParams market;
    ExpirySpec expiry;
    std::string payoff = "call";
    double strike = 100.0;
    std::string algo = "reco";
    std::string output = "csv";
    std::uint64_t seed = 42;
    unsigned workers = 0;
    bool timing = false;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Builds the expiry law for the configured lattice. Throws UsageError when
/// the expiry flags are inconsistent with the lattice (e.g. lambda * dt >= 1).
ExpiryLaw build_law(const RunConfig& cfg);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reopt::cli
