#pragma once

#include <stdexcept>
#include <string>

namespace dshell {

enum class ErrorKind { Domain, Config, Identity, Drift, Solver };

// Exit-code contract of the command-line front-end.
inline int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Identity: return 2;
    case ErrorKind::Drift: return 3;
    case ErrorKind::Solver: return 4;
    case ErrorKind::Domain: return 4;
    }
    return 4;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace dshell
