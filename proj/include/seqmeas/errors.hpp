#pragma once

#include <stdexcept>
#include <string>

namespace seqmeas {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : Error {
  using Error::Error;
};
struct ResourceLimitError : Error {
  using Error::Error;
};
struct InvalidTermError : Error {
  using Error::Error;
};
struct ZeroMassError : Error {
  using Error::Error;
};
struct UndefinedValueError : Error {
  using Error::Error;
};
struct PartitionError : Error {
  using Error::Error;
};
struct NormalizationError : Error {
  using Error::Error;
};
struct UnstructuredInputError : Error {
  using Error::Error;
};
struct InexactBaseError : Error {
  using Error::Error;
};
struct ScheduleViolationError : Error {
  using Error::Error;
};
struct DecayUnresolvableError : Error {
  using Error::Error;
};
struct CertificateInvalidError : Error {
  using Error::Error;
};
struct OracleFailureError : Error {
  using Error::Error;
};
struct ExhaustedStreamError : Error {
  using Error::Error;
};
struct NonNullInputError : Error {
  using Error::Error;
};
struct LevelRangeError : Error {
  using Error::Error;
};

}  // namespace seqmeas
