#pragma once

#include <stdexcept>
#include <string>

namespace afba {

// Malformed or inconsistent input data. The command line tool maps this
// to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure pinned to a 1-based line of the input stream.
class ParseError : public DataError {
public:
    ParseError(long long line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    long long line() const noexcept { return line_; }

private:
    long long line_;
};

// An iteration produced a non-finite value, or an iterative numerical
// procedure failed to converge. Exit code 3 in the command line tool.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace afba
