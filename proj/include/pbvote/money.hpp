#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pbvote {

// Non-negative amount of currency in minor units (cents).
class Money {
public:
  constexpr Money() = default;

  static Money cents(std::int64_t amount);
  static Money dollars(std::int64_t amount);

  // Parses a decimal dollar string such as "12.50"; rejects sub-cent precision.
  static Money parse_dollars(std::string_view text);

  [[nodiscard]] constexpr std::int64_t in_cents() const noexcept { return cents_; }
  [[nodiscard]] constexpr bool is_zero() const noexcept { return cents_ == 0; }

  // Checked arithmetic; throws std::overflow_error / std::domain_error.
  Money operator+(Money other) const;
  Money operator-(Money other) const;
  Money& operator+=(Money other);
  Money& operator-=(Money other);
  Money operator*(std::int64_t factor) const;

  [[nodiscard]] std::string to_string() const;  // "70.00"

  friend constexpr auto operator<=>(Money, Money) = default;

private:
  explicit constexpr Money(std::int64_t c) : cents_(c) {}
  std::int64_t cents_ = 0;
};

std::ostream& operator<<(std::ostream& os, Money m);

Money min(Money a, Money b);

}  // namespace pbvote
