#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace digisim {

enum class ErrorKind {
    StateClassStraddlesCountyClass,
    InconsistentBounds,
    SchemaError,
    UnknownSizeClass,
    NegativeCount,
    UnknownCell,
    BadWeek,
    NegativeValue,
    CoordinateOutOfRange,
    InvalidModel,
    BigMTooSmall,
    Infeasible,
    MissingEnclosingTotal,
    NegativeResidual,
    ConsistencyError,
    NoCells,
    MissingLayer,
    MissingPrerequisite,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can serialize it into errors.json without parsing messages.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message);

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace digisim
