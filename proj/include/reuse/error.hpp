#pragma once

#include <stdexcept>
#include <string>

namespace reuse {

enum class ErrorKind {
    DegreeCap,
    Undefined,
    SearchExhausted,
    Quadrature,
    Domain,
    Numeric,
    Config,
    Usage,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised by monomial_reduction when no power up to the cap qualifies.
class SearchExhausted : public Error {
public:
    SearchExhausted(const std::string& what, int best_ie, int best_power)
        : Error(ErrorKind::SearchExhausted, what), best_ie_(best_ie), best_power_(best_power) {}

    int best_ie() const noexcept { return best_ie_; }
    int best_power() const noexcept { return best_power_; }

private:
    int best_ie_;
    int best_power_;
};

}  // namespace reuse
