#include "claimex/error.hpp"

namespace claimex {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::config: return "config";
        case ErrorKind::data: return "data";
        case ErrorKind::parse: return "parse";
        case ErrorKind::network: return "network";
        case ErrorKind::provider: return "provider";
        case ErrorKind::missing_fixture: return "missing_fixture";
        case ErrorKind::image_access: return "image_access";
    }
    return "unknown";
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage:
        case ErrorKind::config:
            return 64;
        case ErrorKind::data:
        case ErrorKind::parse:
            return 65;
        case ErrorKind::network:
        case ErrorKind::provider:
        case ErrorKind::missing_fixture:
        case ErrorKind::image_access:
            return 69;
    }
    return 70;
}

}  // namespace claimex
