#include "fibrenet/frequency.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fibrenet {
namespace {

__extension__ typedef __int128 i128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

[[noreturn]] void bad(std::string_view text, const char* why) {
  throw std::invalid_argument("invalid exact frequency '" + std::string(text) + "': " + why);
}

std::int64_t narrow(i128 v, std::string_view text) {
  if (v > kMax || v < -kMax) bad(text, "out of 64-bit range");
  return static_cast<std::int64_t>(v);
}

std::int64_t parse_integer(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) bad(whole, "expected an integer");
  return v;
}

}  // namespace

Frequency parse_frequency(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) bad(text, "empty");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = parse_integer(s.substr(0, slash), text);
    auto den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) bad(text, "zero denominator");
    return Frequency(num, den);
  }

  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  i128 mantissa = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > kMax) bad(text, "too many digits");
      if (seen_point) ++frac_digits;
      seen_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) bad(text, "no digits");
  int exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') bad(text, "unexpected character");
    std::string_view e = s.substr(i + 1);
    if (!e.empty() && e.front() == '+') e.remove_prefix(1);
    exponent = static_cast<int>(parse_integer(e, text));
  }
  int scale = exponent - frac_digits;
  i128 num = mantissa;
  i128 den = 1;
  for (; scale > 0; --scale) {
    num *= 10;
    if (num > kMax) bad(text, "out of 64-bit range");
  }
  for (; scale < 0; ++scale) {
    den *= 10;
    if (den > kMax) bad(text, "too many fractional digits");
  }
  if (negative) num = -num;
  return Frequency(narrow(num, text), narrow(den, text));
}

std::string format_frequency(const Frequency& f) {
  std::int64_t num = f.numerator();
  std::int64_t den = f.denominator();
  std::int64_t d = den;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return std::to_string(num) + "/" + std::to_string(den);

  int digits = std::max(twos, fives);
  i128 scaled = static_cast<i128>(num);
  i128 factor = 1;
  for (int k = 0; k < digits; ++k) factor *= 10;
  scaled = scaled * (factor / den);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string body;
  do {
    body.insert(body.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  } while (scaled > 0);
  if (digits > 0) {
    while (static_cast<int>(body.size()) <= digits) body.insert(body.begin(), '0');
    body.insert(body.end() - digits, '.');
  }
  return negative ? "-" + body : body;
}

double to_double(const Frequency& f) {
  return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

Frequency exact_scale(double scale) {
  if (!std::isfinite(scale)) throw std::invalid_argument("scale must be finite");
  if (scale == 0.0) return Frequency(0);
  int exp = 0;
  double m = std::frexp(scale, &exp);  // scale = m * 2^exp, 0.5 <= |m| < 1
  auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  int shift = exp - 53;
  while (shift < 0 && (mant % 2) == 0) {
    mant /= 2;
    ++shift;
  }
  if (shift < -40 || shift > 10) {
    throw std::invalid_argument("scale " + std::to_string(scale) +
                                " has no exact small-denominator rational form");
  }
  if (shift >= 0) return Frequency(mant * (std::int64_t{1} << shift));
  return Frequency(mant, std::int64_t{1} << (-shift));
}

}  // namespace fibrenet
