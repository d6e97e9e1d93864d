#pragma once

#include <stdexcept>
#include <string>

namespace bandcodes {

// Failure categories surfaced by the library. Tests match on the kind, not
// on message text.
enum class ErrorKind {
    Parameter,      // invalid N/W/f, bad distribution, bad config value
    Dimension,      // mismatched vector lengths or payload sizes
    Malformed,      // packet violates structural rules (support, framing)
    Routing,        // packet addressed to a different generation
    Consistency,    // equal coefficients but different payloads
    NotReady,       // operation requires a completed decode
    NoData,         // recombination from an empty state
    RetryExhausted, // bounded random retry failed and no fallback exists
    Io,             // file or stream failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace bandcodes
