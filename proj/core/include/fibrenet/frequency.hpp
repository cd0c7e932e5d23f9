#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace fibrenet {

// Exact frequency in Hz. All carrier and offset bookkeeping goes through this
// type so sums of AOM and LO shifts never round.
using Frequency = boost::rational<std::int64_t>;

/// Parse an exact decimal ("75e6", "-37.5e6", "194.4e12", "0.125") or a
/// fraction ("1/3") into a Frequency. Throws std::invalid_argument.
Frequency parse_frequency(std::string_view text);

/// Inverse of parse_frequency: a terminating decimal when one exists,
/// otherwise "p/q".
std::string format_frequency(const Frequency& f);

double to_double(const Frequency& f);

/// Exact rational value of a double whose binary expansion fits a 2^40
/// denominator. Throws std::invalid_argument otherwise.
Frequency exact_scale(double scale);

}  // namespace fibrenet
