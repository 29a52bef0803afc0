#pragma once

#include <stdexcept>
#include <string>

namespace qrc {

/// A caller broke an operation's precondition or supplied malformed input.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File-system or network trouble; the CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No entropy could be served and the fallback policy forbids substitution.
class EntropyUnavailable : public IoError {
public:
    using IoError::IoError;
};

}  // namespace qrc
