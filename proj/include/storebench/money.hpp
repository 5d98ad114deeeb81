#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace storebench {

/// Exact decimal currency amount with two fraction digits, stored as minor units.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }

    /// Parses "59.99", "5499", "0.5", "-3.10". Throws std::invalid_argument on anything else,
    /// including more than two fraction digits.
    static Money parse(std::string_view text);

    /// Accepts a JSON string or number. Numbers are rounded to the nearest cent.
    static Money from_json_value(const nlohmann::json& value);

    constexpr std::int64_t cents() const { return cents_; }

    /// Always two fraction digits: "119.98", "0.00".
    std::string to_string() const;

    /// Decimal number for documents whose schema stores prices as JSON numbers.
    double to_double() const { return static_cast<double>(cents_) / 100.0; }

    constexpr Money operator+(Money other) const { return Money(cents_ + other.cents_); }
    constexpr Money operator-(Money other) const { return Money(cents_ - other.cents_); }
    constexpr Money operator*(std::int64_t factor) const { return Money(cents_ * factor); }
    constexpr Money& operator+=(Money other) {
        cents_ += other.cents_;
        return *this;
    }

    constexpr auto operator<=>(const Money&) const = default;

private:
    constexpr explicit Money(std::int64_t cents) : cents_(cents) {}

    std::int64_t cents_ = 0;
};

/// Mean of two amounts, rounded half away from zero to the cent.
Money midpoint(Money a, Money b);

}  // namespace storebench
