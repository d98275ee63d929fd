#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ultrashift {

// Arbitrary-precision integers and rationals. Nat is nonnegative by
// convention; every arithmetic path that could go negative asserts.
using Nat = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Nat pow2(const Nat& e) {
    if (e < 0) throw std::invalid_argument("pow2: negative exponent");
    Nat r = 1;
    return r << static_cast<std::size_t>(e.convert_to<std::uint64_t>());
}

// Index of the most significant bit, msb(1) = 0.
inline std::uint64_t msb_index(const Nat& n) {
    if (n <= 0) throw std::invalid_argument("msb_index: nonpositive");
    return boost::multiprecision::msb(n);
}

inline Nat ceil_div(const Nat& a, const Nat& b) {
    if (b <= 0) throw std::invalid_argument("ceil_div: nonpositive divisor");
    return (a + b - 1) / b;
}

inline std::uint64_t to_u64(const Nat& n) {
    return n.convert_to<std::uint64_t>();
}

inline std::string to_string(const Nat& n) { return n.str(); }

inline std::string rat_string(const Rat& q) {
    return boost::multiprecision::numerator(q).str() + "/" +
           boost::multiprecision::denominator(q).str();
}

}  // namespace ultrashift
