#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace claimex {

enum class ErrorKind {
    usage,            // bad invocation / flag combination
    config,           // missing wiring: template, credential, stage input
    data,             // malformed dataset / CSV / date
    parse,            // model reply failed structured parsing after repair
    network,          // transport-level failure (retryable class)
    provider,         // provider/service failure after retries
    missing_fixture,  // replay backend has no fixture for the key
    image_access,     // image unreadable / unfetchable
};

std::string_view to_string(ErrorKind kind);

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

/// Exit-code contract used by the CLI: usage errors map to the 64 class,
/// data errors to 65, provider/transport errors to 69.
int exit_code_for(ErrorKind kind);

}  // namespace claimex
