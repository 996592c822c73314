#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

namespace reopt {

/// Law of the random expiry period tau over {0, ..., N}.
///
/// Stored as an exact PMF. The constructor normalizes the vector so that
/// downstream hazards and survival values are self-consistent. A law whose
/// survival is exhausted before N (e.g. the floor discretization of a law
/// supported strictly inside [0, T)) is accepted; its hazard is 1 at the
/// last reachable period and by convention 1 afterwards.
class ExpiryLaw {
public:
    /// Throws Error(InvalidLaw) unless pmf has >= 2 entries, all finite and
    /// nonnegative, summing to 1 within 1e-12.
    explicit ExpiryLaw(std::vector<double> pmf);

    int steps() const noexcept { return static_cast<int>(pmf_.size()) - 1; }
    std::span<const double> pmf() const noexcept { return pmf_; }
    double pmf(int k) const { return pmf_.at(static_cast<std::size_t>(k)); }

    /// S(k) = sum_{j >= k} pmf[j], k = 0..N.
    std::vector<double> survival() const;

    /// h(k) = pmf[k] / S(k) for k = 0..N-1 (1 where S(k) == 0).
    std::vector<double> hazards() const;

    friend bool operator==(const ExpiryLaw&, const ExpiryLaw&) = default;

private:
    std::vector<double> pmf_;
};

/// Finite geometric law: constant hazard p on periods 0..N-1.
ExpiryLaw geometric_law(double p, int steps);

/// Inverse of the hazard identity. Each hazard must lie in [0, 1).
ExpiryLaw law_from_hazards(std::span<const double> hazards);

/// Continuous-time expiry laws on [0, T].
struct ExponentialWithAtom {
    double lambda = 0.1;
    double horizon = 1.0;  ///< T; carries the atom exp(-lambda T)
};

struct PointMass {
    double time = 1.0;
    double horizon = 1.0;
};

/// CDF on [0, horizon]; cdf(horizon) must be 1. Any jump at the horizon
/// (1 - cdf(T-)) is treated as an atom there.
struct GenericDensity {
    std::function<double(double)> cdf;
    double horizon = 1.0;
};

using ContinuousExpiry = std::variant<ExponentialWithAtom, PointMass, GenericDensity>;

double horizon_of(const ContinuousExpiry& cont);

/// Probability mass at the horizon T.
double atom_at_horizon(const ContinuousExpiry& cont);

void validate(const ContinuousExpiry& cont);

enum class DiscretizeMode {
    Floor,         ///< tau_n = floor(n tau)
    FloorPlusOne,  ///< tau_n = floor(n tau + 1); requires no atom at T
};

/// Exact law of the discretized expiry on {0, ..., n T} computed from the CDF.
/// n T must be integral.
ExpiryLaw discretize(const ContinuousExpiry& cont, int per_unit_time, DiscretizeMode mode);

/// E[exp(-y tau dt)]: the moment generating function of tau at -y dt.
double discount_mgf(const ExpiryLaw& law, double yield, double dt);

nlohmann::json to_json(const ExpiryLaw& law);
ExpiryLaw expiry_law_from_json(const nlohmann::json& j);

/// GenericDensity has no JSON form; serializing one throws InvalidMode.
nlohmann::json to_json(const ContinuousExpiry& cont);
ContinuousExpiry continuous_expiry_from_json(const nlohmann::json& j);

}  // namespace reopt
