#include "digisim/error.hpp"

namespace digisim {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::StateClassStraddlesCountyClass:
        return "StateClassStraddlesCountyClass";
    case ErrorKind::InconsistentBounds:
        return "InconsistentBounds";
    case ErrorKind::SchemaError:
        return "SchemaError";
    case ErrorKind::UnknownSizeClass:
        return "UnknownSizeClass";
    case ErrorKind::NegativeCount:
        return "NegativeCount";
    case ErrorKind::UnknownCell:
        return "UnknownCell";
    case ErrorKind::BadWeek:
        return "BadWeek";
    case ErrorKind::NegativeValue:
        return "NegativeValue";
    case ErrorKind::CoordinateOutOfRange:
        return "CoordinateOutOfRange";
    case ErrorKind::InvalidModel:
        return "InvalidModel";
    case ErrorKind::BigMTooSmall:
        return "BigMTooSmall";
    case ErrorKind::Infeasible:
        return "Infeasible";
    case ErrorKind::MissingEnclosingTotal:
        return "MissingEnclosingTotal";
    case ErrorKind::NegativeResidual:
        return "NegativeResidual";
    case ErrorKind::ConsistencyError:
        return "ConsistencyError";
    case ErrorKind::NoCells:
        return "NoCells";
    case ErrorKind::MissingLayer:
        return "MissingLayer";
    case ErrorKind::MissingPrerequisite:
        return "MissingPrerequisite";
    case ErrorKind::ConfigError:
        return "ConfigError";
    case ErrorKind::IoError:
        return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error{std::string{to_string(kind)} + ": " + message}, kind_{kind} {}

} // namespace digisim
