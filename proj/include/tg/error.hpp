#pragma once

#include <stdexcept>
#include <string>

namespace tg {

/// Broad failure categories. The CLI maps validation/domain/parse to exit
/// code 1 and io/network to exit code 2.
enum class ErrorKind {
    io,
    parse,
    validation,
    domain,
    network,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::io: return "io";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::domain: return "domain";
        case ErrorKind::network: return "network";
    }
    return "unknown";
}

}  // namespace tg
