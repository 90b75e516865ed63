#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>

namespace mps {

/// Arbitrary-precision rational scalar for the exact arithmetic backend.
/// Finite spaces with rational metrics and rational radial measures run
/// their identity checks in this type so that "equal" means equal.
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(std::int64_t num, std::int64_t den = 1) { return Rat(num, den); }

inline double to_double(const Rat& x) { return static_cast<double>(x); }

}  // namespace mps
