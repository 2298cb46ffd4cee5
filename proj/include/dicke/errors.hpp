#pragma once

#include <stdexcept>
#include <string>

namespace dicke {

// Error categories map 1:1 onto the CLI exit codes (2/3/4).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

class limit_error : public std::runtime_error {
public:
    explicit limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dicke
