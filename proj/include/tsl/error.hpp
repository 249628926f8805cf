#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

/// Base of every error thrown by the library. The exit code is the CLI
/// contract: 1 semantic failure, 2 input error, 3 unsupported feature.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Malformed input text (fact files, requests, XML, CSV).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what, 2) {}
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what, 2) {}
};

/// Well-formed input that references ids it has not declared, or violates
/// a structural invariant.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(what, 2) {}
};

/// Input outside the supported subset (e.g. spiral geometry).
class UnsupportedFeature : public Error {
public:
    explicit UnsupportedFeature(const std::string& what) : Error(what, 3) {}
};

/// A scenario or scene that fails the rule catalog.
class SemanticError : public Error {
public:
    explicit SemanticError(const std::string& what) : Error(what, 1) {}
};

}  // namespace tsl
