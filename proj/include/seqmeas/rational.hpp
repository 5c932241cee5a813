#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace seqmeas {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// 2^(-e) as an exact rational.
Rational pow2_inv(unsigned e);
Integer pow2(unsigned e);

// JSON form: [num, den]; components are JSON integers when they fit in
// int64, decimal strings otherwise. Parsing accepts integers, strings and
// {"num":..,"den":..} objects.
nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

// Single integer: JSON integer when it fits in int64, decimal string
// otherwise.
nlohmann::json integer_to_json(const Integer& n);
Integer integer_from_json(const nlohmann::json& j);

// "p/q" (or "p" when q == 1), used by the CLI and human-readable output.
std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

}  // namespace seqmeas
