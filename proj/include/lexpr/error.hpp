#pragma once

#include <stdexcept>
#include <string>

namespace lexpr {

/// Malformed or inconsistent input: bad vertex, signature mismatch, parse error.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An enumeration or search would exceed a documented blow-up guard.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A semantic precondition failed (non-hereditary oracle, commutation check, ...).
class LogicError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A search budget (nodes or seconds) ran out before an answer was found.
/// Never means "no".
class TimeoutError : public ResourceError {
public:
    TimeoutError(const std::string& what, unsigned long long nodes) : ResourceError(what), nodes_(nodes) {}
    [[nodiscard]] unsigned long long nodes() const { return nodes_; }

private:
    unsigned long long nodes_ = 0;
};

} // namespace lexpr
