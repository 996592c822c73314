#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>

namespace reopt {

struct Call {
    double strike = 100.0;
};
struct Put {
    double strike = 100.0;
};
struct ZeroStrikeCall {};
struct LogContract {
    double reference = 100.0;
};
/// User-supplied f(S). `bounded` declares that f is bounded on (0, inf),
/// which the Monte-Carlo limit pricer requires unless forced.
struct Custom {
    std::function<double(double)> fn;
    bool bounded = false;
    std::string label = "custom";
};

/// Terminal payoff f(S) paid at the (random) expiry.
class PayoffSpec {
public:
    using Kind = std::variant<Call, Put, ZeroStrikeCall, LogContract, Custom>;

    PayoffSpec(Kind kind);  // NOLINT: implicit on purpose, PayoffSpec p{Put{100}};

    static PayoffSpec call(double strike) { return PayoffSpec(Call{strike}); }
    static PayoffSpec put(double strike) { return PayoffSpec(Put{strike}); }
    static PayoffSpec zero_strike_call() { return PayoffSpec(ZeroStrikeCall{}); }
    static PayoffSpec log_contract(double reference) { return PayoffSpec(LogContract{reference}); }
    static PayoffSpec custom(std::function<double(double)> fn, bool bounded, std::string label = "custom") {
        return PayoffSpec(Custom{std::move(fn), bounded, std::move(label)});
    }

    /// Throws InvalidPrice for s <= 0 and NonFinitePayoff if f(s) is not finite.
    double operator()(double s) const;

    bool is_bounded() const noexcept;
    const Kind& kind() const noexcept { return kind_; }

    /// CLI name: call, put, zsc, logcontract (custom payoffs report their label).
    std::string name() const;

    /// Strike for call/put, reference for the log contract, 0 otherwise.
    double strike() const noexcept;

private:
    Kind kind_;
};

double evaluate(const PayoffSpec& payoff, double s);

/// Builds a payoff from its CLI name; `strike` doubles as the log-contract
/// reference. Throws Error(InvalidParams) on unknown names.
PayoffSpec parse_payoff(std::string_view name, double strike = 100.0);

}  // namespace reopt
