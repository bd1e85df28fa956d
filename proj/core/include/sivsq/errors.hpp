#pragma once

#include <stdexcept>
#include <string>

namespace sivsq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// precondition or shape violation
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = 0, std::string key = {})
        : Error(format(msg, line, key)), line_(line), key_(std::move(key)) {}

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    static std::string format(const std::string& msg, int line, const std::string& key) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!key.empty()) out += "'" + key + "': ";
        return out + msg;
    }
    int line_;
    std::string key_;
};

// trace / hermiticity / positivity / step underflow
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace sivsq
