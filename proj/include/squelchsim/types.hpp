#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace squelchsim {

using NodeId = std::uint32_t;
using PeerId = NodeId;
using ValidatorId = NodeId;

// Simulated wall clock, milliseconds.
using SimTime = double;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownNodeError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ContractViolation : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace squelchsim
