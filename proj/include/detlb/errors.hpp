#pragma once

#include <stdexcept>
#include <string>

namespace detlb {

// Mismatched carriers (variable tables, truncation bounds, arities).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input outside the domain of an operation (zero constant term, d = 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A Chow model failed validation or produced a class it cannot integrate.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The model lacks the structure an operation needs (base, base dimension).
class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed textual input (expressions, model files, scripts).
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace detlb
