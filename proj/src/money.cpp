#include "pbvote/money.hpp"

#include <cctype>
#include <limits>
#include <ostream>

namespace pbvote {

Money Money::cents(std::int64_t amount) {
  if (amount < 0) throw std::domain_error("money amount must be non-negative: " + std::to_string(amount));
  return Money(amount);
}

Money Money::dollars(std::int64_t amount) {
  if (amount < 0) throw std::domain_error("money amount must be non-negative: " + std::to_string(amount));
  if (amount > std::numeric_limits<std::int64_t>::max() / 100) throw std::overflow_error("money amount overflows");
  return Money(amount * 100);
}

Money Money::parse_dollars(std::string_view text) {
  auto fail = [&](const char* why) {
    return std::invalid_argument("invalid dollar amount '" + std::string(text) + "': " + why);
  };
  if (text.empty()) throw fail("empty");
  std::size_t i = 0;
  if (text[0] == '+') ++i;
  if (i < text.size() && text[i] == '-') throw fail("negative");
  std::int64_t whole = 0;
  bool any_digit = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    if (whole > (std::numeric_limits<std::int64_t>::max() - 9) / 10) throw fail("overflow");
    whole = whole * 10 + (text[i] - '0');
    any_digit = true;
  }
  std::int64_t frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    int digits = 0;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++digits) {
      any_digit = true;
      const int d = text[i] - '0';
      if (digits < 2) {
        frac = frac * 10 + d;
      } else if (d != 0) {
        throw fail("sub-cent precision");
      }
    }
    if (digits == 1) frac *= 10;
  }
  if (i != text.size() || !any_digit) throw fail("not a number");
  return Money::dollars(whole) + Money::cents(frac);
}

Money Money::operator+(Money other) const {
  if (cents_ > std::numeric_limits<std::int64_t>::max() - other.cents_) throw std::overflow_error("money addition overflows");
  return Money(cents_ + other.cents_);
}

Money Money::operator-(Money other) const {
  if (other.cents_ > cents_) throw std::domain_error("money subtraction would go negative");
  return Money(cents_ - other.cents_);
}

Money& Money::operator+=(Money other) { return *this = *this + other; }
Money& Money::operator-=(Money other) { return *this = *this - other; }

Money Money::operator*(std::int64_t factor) const {
  if (factor < 0) throw std::domain_error("money scaled by negative factor");
  if (factor != 0 && cents_ > std::numeric_limits<std::int64_t>::max() / factor) throw std::overflow_error("money multiplication overflows");
  return Money(cents_ * factor);
}

std::string Money::to_string() const {
  std::string frac = std::to_string(cents_ % 100);
  if (frac.size() == 1) frac.insert(frac.begin(), '0');
  return std::to_string(cents_ / 100) + "." + frac;
}

std::ostream& operator<<(std::ostream& os, Money m) { return os << m.to_string(); }

Money min(Money a, Money b) { return a < b ? a : b; }

}  // namespace pbvote
