#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sv2 {

enum class ErrorCode {
    InputTooShort,
    OutOfBounds,
    NotAStore,
    NotAHeader,
    NotAMap,
    NotADataPage,
    WrongSubtype,
    DecompressError,
    NoPlausibleWalk,
    SpecInvalid,
    SpecTooLarge,
    UnknownTarget,
    NonEmptyFolder,
    InvalidEvent,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Recoverable structural anomaly. `code` is a stable identifier
// (e.g. "NonCanonicalHeaderSize"), `offset` is relative to the input the
// diagnostic was raised against.
struct Diagnostic {
    std::uint64_t offset = 0;
    std::string code;
    std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace sv2
