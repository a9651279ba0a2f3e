#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selfsort {

/// Agent received a message or reached a state the protocol forbids.
class ProtocolFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed or unknown wire line.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(const std::string& message, std::string verb = {})
        : std::runtime_error(message), verb_(std::move(verb)) {}
    const std::string& verb() const noexcept { return verb_; }

private:
    std::string verb_;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SealedListError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Observation attempted while a temp-slot move is half done.
class TransientStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A granted swap no longer matches the slots it was granted against.
class SwapAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A legitimate "nothing to do" outcome: too few records, ignored trigger.
class Refusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& message, std::size_t row = 0)
        : std::runtime_error(message), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace selfsort
