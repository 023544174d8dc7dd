#pragma once

#include <stdexcept>
#include <string>

namespace cmm {

// Error taxonomy shared by the library and the CLI.
// Exit codes: 0 success, 2 config, 3 data, 4 numeric, 5 format.
class Error : public std::runtime_error {
public:
    Error(int exit_code, const std::string& what)
        : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(2, w) {}
};
struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error(2, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(3, w) {}
};
struct StateError : Error {
    explicit StateError(const std::string& w) : Error(3, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(3, w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(4, w) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(5, w) {}
};

} // namespace cmm
