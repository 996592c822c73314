#include "reopt/payoff.hpp"

#include "reopt/error.hpp"

#include <algorithm>
#include <cmath>

namespace reopt {

PayoffSpec::PayoffSpec(Kind kind) : kind_(std::move(kind)) {
    if (const auto* c = std::get_if<Call>(&kind_); c && !(c->strike > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "call strike must be > 0");
    }
    if (const auto* p = std::get_if<Put>(&kind_); p && !(p->strike > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "put strike must be > 0");
    }
    if (const auto* l = std::get_if<LogContract>(&kind_); l && !(l->reference > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "log-contract reference must be > 0");
    }
    if (const auto* c = std::get_if<Custom>(&kind_); c && !c->fn) {
        throw Error(ErrorCode::InvalidParams, "custom payoff needs a function");
    }
}

double PayoffSpec::operator()(double s) const {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidPrice, "payoff evaluated at non-positive price");
    switch (kind_.index()) {
    case 0: return std::max(0.0, s - std::get<Call>(kind_).strike);
    case 1: return std::max(0.0, std::get<Put>(kind_).strike - s);
    case 2: return s;
    case 3: return std::log(s / std::get<LogContract>(kind_).reference);
    default: break;
    }
    const auto& custom = std::get<Custom>(kind_);
    const double v = custom.fn(s);
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinitePayoff,
                    "payoff '" + custom.label + "' returned a non-finite value at S=" + std::to_string(s));
    }
    return v;
}

bool PayoffSpec::is_bounded() const noexcept {
    if (std::holds_alternative<Put>(kind_)) return true;
    if (const auto* c = std::get_if<Custom>(&kind_)) return c->bounded;
    return false;
}

std::string PayoffSpec::name() const {
    switch (kind_.index()) {
    case 0: return "call";
    case 1: return "put";
    case 2: return "zsc";
    case 3: return "logcontract";
    default: return std::get<Custom>(kind_).label;
    }
}

double PayoffSpec::strike() const noexcept {
    if (const auto* c = std::get_if<Call>(&kind_)) return c->strike;
    if (const auto* p = std::get_if<Put>(&kind_)) return p->strike;
    if (const auto* l = std::get_if<LogContract>(&kind_)) return l->reference;
    return 0.0;
}

double evaluate(const PayoffSpec& payoff, double s) { return payoff(s); }

PayoffSpec parse_payoff(std::string_view name, double strike) {
    if (name == "call") return PayoffSpec::call(strike);
    if (name == "put") return PayoffSpec::put(strike);
    if (name == "zsc") return PayoffSpec::zero_strike_call();
    if (name == "logcontract") return PayoffSpec::log_contract(strike);
    throw Error(ErrorCode::InvalidParams, "unknown payoff '" + std::string(name) +
                                              "' (expected call, put, zsc, logcontract)");
}

}  // namespace reopt
