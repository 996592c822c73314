#include "reopt/expiry.hpp"

#include "reopt/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace reopt {

namespace {

constexpr double kSumTolerance = 1e-12;

// Left limit F(x-) of a CDF given only pointwise evaluation.
double left_limit(const std::function<double(double)>& cdf, double x) {
    if (x <= 0.0) return 0.0;
    return cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
}

// floor(x) that snaps values within rounding noise of an integer, so that
// e.g. 0.29 * 100 lands on 29 rather than 28.
double snapped_floor(double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) return nearest;
    return std::floor(x);
}

int periods_for(double horizon, int per_unit_time) {
    if (per_unit_time < 1) throw Error(ErrorCode::InvalidParams, "periods per unit time must be >= 1");
    const double exact = horizon * per_unit_time;
    const double nearest = std::round(exact);
    if (nearest < 1.0 || std::abs(exact - nearest) > 1e-9 * std::max(1.0, exact)) {
        throw Error(ErrorCode::InvalidParams, "n * T must be a positive integer");
    }
    return static_cast<int>(nearest);
}

}  // namespace

ExpiryLaw::ExpiryLaw(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.size() < 2) throw Error(ErrorCode::InvalidLaw, "pmf needs at least 2 entries (N >= 1)");
    for (double p : pmf_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw Error(ErrorCode::InvalidLaw, "pmf entries must be finite and >= 0");
        }
    }
    const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
    if (std::abs(total - 1.0) > kSumTolerance) {
        throw Error(ErrorCode::InvalidLaw, "pmf must sum to 1, got " + std::to_string(total));
    }
    for (double& p : pmf_) p /= total;
}

std::vector<double> ExpiryLaw::survival() const {
    std::vector<double> s(pmf_.size());
    double tail = 0.0;
    for (std::size_t k = pmf_.size(); k-- > 0;) {
        tail += pmf_[k];
        s[k] = tail;
    }
    return s;
}

std::vector<double> ExpiryLaw::hazards() const {
    const auto s = survival();
    std::vector<double> h(pmf_.size() - 1);
    for (std::size_t k = 0; k < h.size(); ++k) {
        // fl(pmf[k] + S(k+1)) >= pmf[k], so the ratio never exceeds 1.
        h[k] = s[k] > 0.0 ? pmf_[k] / s[k] : 1.0;
    }
    return h;
}

ExpiryLaw geometric_law(double p, int steps) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidParams, "geometric p must lie in (0, 1)");
    if (steps < 1) throw Error(ErrorCode::InvalidParams, "steps must be >= 1");
    std::vector<double> pmf(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k < steps; ++k) pmf[static_cast<std::size_t>(k)] = p * std::pow(1.0 - p, k);
    pmf.back() = std::pow(1.0 - p, steps);
    return ExpiryLaw(std::move(pmf));
}

ExpiryLaw law_from_hazards(std::span<const double> hazards) {
    if (hazards.empty()) throw Error(ErrorCode::InvalidParams, "need at least one hazard");
    std::vector<double> pmf(hazards.size() + 1);
    double alive = 1.0;
    for (std::size_t k = 0; k < hazards.size(); ++k) {
        const double h = hazards[k];
        if (!(h >= 0.0 && h < 1.0)) {
            throw Error(ErrorCode::InvalidHazard, "hazard " + std::to_string(k) + " outside [0, 1)");
        }
        pmf[k] = h * alive;
        alive *= 1.0 - h;
    }
    pmf.back() = alive;
    return ExpiryLaw(std::move(pmf));
}

double horizon_of(const ContinuousExpiry& cont) {
    return std::visit([](const auto& c) { return c.horizon; }, cont);
}

double atom_at_horizon(const ContinuousExpiry& cont) {
    struct {
        double operator()(const ExponentialWithAtom& c) const { return std::exp(-c.lambda * c.horizon); }
        double operator()(const PointMass& c) const { return c.time >= c.horizon ? 1.0 : 0.0; }
        double operator()(const GenericDensity& c) const {
            return std::max(0.0, 1.0 - left_limit(c.cdf, c.horizon));
        }
    } visitor;
    return std::visit(visitor, cont);
}

void validate(const ContinuousExpiry& cont) {
    const double horizon = horizon_of(cont);
    if (!(std::isfinite(horizon) && horizon > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "expiry horizon must be > 0");
    }
    if (const auto* e = std::get_if<ExponentialWithAtom>(&cont)) {
        if (!(std::isfinite(e->lambda) && e->lambda > 0.0)) {
            throw Error(ErrorCode::InvalidParams, "lambda must be > 0");
        }
    } else if (const auto* pm = std::get_if<PointMass>(&cont)) {
        if (!(pm->time >= 0.0 && pm->time <= pm->horizon)) {
            throw Error(ErrorCode::InvalidParams, "point mass must lie in [0, T]");
        }
    } else {
        const auto& g = std::get<GenericDensity>(cont);
        if (!g.cdf) throw Error(ErrorCode::InvalidParams, "generic expiry needs a CDF");
        if (std::abs(g.cdf(g.horizon) - 1.0) > kSumTolerance) {
            throw Error(ErrorCode::InvalidLaw, "CDF must reach 1 at the horizon");
        }
    }
}

ExpiryLaw discretize(const ContinuousExpiry& cont, int per_unit_time, DiscretizeMode mode) {
    validate(cont);
    const double horizon = horizon_of(cont);
    const int steps = periods_for(horizon, per_unit_time);
    const double n = per_unit_time;
    const double atom = atom_at_horizon(cont);
    if (mode == DiscretizeMode::FloorPlusOne && atom > kSumTolerance) {
        throw Error(ErrorCode::InvalidMode, "floor-plus-one needs a law without an atom at T");
    }

    // Law of floor(n tau) on {0, ..., steps}.
    std::vector<double> pmf(static_cast<std::size_t>(steps) + 1, 0.0);
    if (const auto* e = std::get_if<ExponentialWithAtom>(&cont)) {
        const double p = -std::expm1(-e->lambda / n);
        for (int k = 0; k < steps; ++k) pmf[static_cast<std::size_t>(k)] = std::exp(-e->lambda * k / n) * p;
        pmf.back() = atom;
    } else if (const auto* pm = std::get_if<PointMass>(&cont)) {
        const double k = pm->time >= horizon ? steps : snapped_floor(n * pm->time);
        pmf[static_cast<std::size_t>(std::min<double>(k, steps))] = 1.0;
    } else {
        const auto& cdf = std::get<GenericDensity>(cont).cdf;
        double below = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double upper = k + 1 == steps ? horizon : (k + 1) / n;
            const double next = left_limit(cdf, upper);
            const double mass = next - below;
            if (mass < -kSumTolerance) throw Error(ErrorCode::InvalidLaw, "CDF is not monotone");
            pmf[static_cast<std::size_t>(k)] = std::max(0.0, mass);
            below = next;
        }
        pmf.back() = atom;
    }

    if (mode == DiscretizeMode::FloorPlusOne) {
        // floor(n tau + 1) = floor(n tau) + 1; the top entry carries no mass here.
        for (std::size_t k = pmf.size() - 1; k > 0; --k) pmf[k] = pmf[k - 1];
        pmf[0] = 0.0;
    }
    return ExpiryLaw(std::move(pmf));
}

double discount_mgf(const ExpiryLaw& law, double yield, double dt) {
    double total = 0.0;
    const auto pmf = law.pmf();
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        total += pmf[k] * std::exp(-yield * static_cast<double>(k) * dt);
    }
    return total;
}

nlohmann::json to_json(const ExpiryLaw& law) {
    return {{"pmf", std::vector<double>(law.pmf().begin(), law.pmf().end())}};
}

ExpiryLaw expiry_law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("pmf") || !j.at("pmf").is_array()) {
        throw Error(ErrorCode::InvalidLaw, "expected {\"pmf\": [...]}");
    }
    return ExpiryLaw(j.at("pmf").get<std::vector<double>>());
}

nlohmann::json to_json(const ContinuousExpiry& cont) {
    if (const auto* e = std::get_if<ExponentialWithAtom>(&cont)) {
        return {{"kind", "exp_atom"}, {"lambda", e->lambda}, {"T", e->horizon}};
    }
    if (const auto* pm = std::get_if<PointMass>(&cont)) {
        return {{"kind", "point_mass"}, {"t", pm->time}, {"T", pm->horizon}};
    }
    throw Error(ErrorCode::InvalidMode, "generic CDF expiry laws are not serializable");
}

ContinuousExpiry continuous_expiry_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    ContinuousExpiry cont;
    if (kind == "exp_atom") {
        cont = ExponentialWithAtom{j.at("lambda").get<double>(), j.at("T").get<double>()};
    } else if (kind == "point_mass") {
        cont = PointMass{j.at("t").get<double>(), j.at("T").get<double>()};
    } else {
        throw Error(ErrorCode::InvalidMode, "unknown expiry kind '" + kind + "'");
    }
    validate(cont);
    return cont;
}

}  // namespace reopt
