#pragma once

#include <stdexcept>
#include <string>

namespace owco {

// Malformed or inconsistent user input (bad index, wrong shape, non-probability row).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A query needs vertices that were cut away by a finite truncation.
class BoundaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A stage was called before its hypotheses were established.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An operator carries a nonzero entry on a null atom.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndeterminateRankError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotStieltjesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace owco
