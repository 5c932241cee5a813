#include "seqmeas/rational.hpp"

#include "seqmeas/errors.hpp"

namespace seqmeas {

Integer pow2(unsigned e) {
  Integer r = 1;
  return r << e;
}

Rational pow2_inv(unsigned e) { return Rational(1, pow2(e)); }

nlohmann::json integer_to_json(const Integer& v) {
  static const Integer lo = std::numeric_limits<std::int64_t>::min();
  static const Integer hi = std::numeric_limits<std::int64_t>::max();
  if (v >= lo && v <= hi) return static_cast<std::int64_t>(v);
  return v.str();
}

Integer integer_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Integer(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      return Integer(j.get<std::string>());
    } catch (const std::exception&) {
      throw ParseError("bad integer literal: " + j.dump());
    }
  }
  throw ParseError("expected integer, got: " + j.dump());
}

nlohmann::json rational_to_json(const Rational& r) {
  return nlohmann::json::array(
      {integer_to_json(numerator(r)), integer_to_json(denominator(r))});
}

Rational rational_from_json(const nlohmann::json& j) {
  Integer num, den;
  if (j.is_array() && j.size() == 2) {
    num = integer_from_json(j[0]);
    den = integer_from_json(j[1]);
  } else if (j.is_object() && j.contains("num") && j.contains("den")) {
    num = integer_from_json(j.at("num"));
    den = integer_from_json(j.at("den"));
  } else if (j.is_number_integer()) {
    num = integer_from_json(j);
    den = 1;
  } else if (j.is_string()) {
    return rational_from_string(j.get<std::string>());
  } else {
    throw ParseError("expected rational, got: " + j.dump());
  }
  if (den == 0) throw ParseError("rational with zero denominator");
  return Rational(num, den);
}

std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(s), 1);
    Integer num(s.substr(0, slash));
    Integer den(s.substr(slash + 1));
    if (den == 0) throw ParseError("rational with zero denominator: " + s);
    return Rational(num, den);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad rational literal: " + s);
  }
}

}  // namespace seqmeas
