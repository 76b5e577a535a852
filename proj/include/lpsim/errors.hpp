#pragma once

#include <stdexcept>
#include <string>

namespace lpsim {

// Every failure the engine can raise, tagged so callers can react without
// string matching. Config covers anything rejected before a run starts.
enum class ErrorKind {
    OutOfBounds,
    EmptyRange,
    DegenerateAxis,
    InvalidOverlapRatio,
    OutsideExtent,
    ZeroWeight,
    ShapeMismatch,
    WorkerFailure,
    InvalidGrouping,
    InvalidArgument,
    NonFinite,
    Config,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace lpsim
