#include "storebench/money.hpp"

#include <cmath>
#include <stdexcept>

namespace storebench {

Money Money::parse(std::string_view text) {
    const std::string original(text);
    if (text.empty()) {
        throw std::invalid_argument("empty money value");
    }
    bool negative = false;
    if (text.front() == '-') {
        negative = true;
        text.remove_prefix(1);
    }
    std::int64_t whole = 0;
    std::int64_t fraction = 0;
    int fraction_digits = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_dot) {
                throw std::invalid_argument("malformed money value: " + original);
            }
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') {
            throw std::invalid_argument("malformed money value: " + original);
        }
        seen_digit = true;
        if (seen_dot) {
            if (++fraction_digits > 2) {
                throw std::invalid_argument("more than two fraction digits: " + original);
            }
            fraction = fraction * 10 + (c - '0');
        } else {
            whole = whole * 10 + (c - '0');
            if (whole > 90'000'000'000'000'000LL / 100) {
                throw std::invalid_argument("money value out of range: " + original);
            }
        }
    }
    if (!seen_digit) {
        throw std::invalid_argument("malformed money value: " + original);
    }
    if (fraction_digits == 1) {
        fraction *= 10;
    }
    const std::int64_t cents = whole * 100 + fraction;
    return Money(negative ? -cents : cents);
}

Money Money::from_json_value(const nlohmann::json& value) {
    if (value.is_string()) {
        return parse(value.get<std::string>());
    }
    if (value.is_number_integer()) {
        return Money(value.get<std::int64_t>() * 100);
    }
    if (value.is_number_float()) {
        return Money(std::llround(value.get<double>() * 100.0));
    }
    throw std::invalid_argument("money value must be a string or number");
}

std::string Money::to_string() const {
    const std::int64_t magnitude = cents_ < 0 ? -cents_ : cents_;
    std::string out = cents_ < 0 ? "-" : "";
    out += std::to_string(magnitude / 100);
    out += '.';
    const std::int64_t frac = magnitude % 100;
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    return out;
}

Money midpoint(Money a, Money b) {
    const std::int64_t sum = a.cents() + b.cents();
    const std::int64_t half = sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
    return Money::from_cents(half);
}

}  // namespace storebench
