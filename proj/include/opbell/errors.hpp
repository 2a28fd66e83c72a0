#pragma once

#include <stdexcept>
#include <string>

namespace opbell {

// Everything thrown on purpose derives from Error, so callers can fence off
// library failures from logic bugs with one catch clause.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

class NonSymmetric : public Error {
public:
    explicit NonSymmetric(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class ConvergenceFailure : public Error {
public:
    explicit ConvergenceFailure(const std::string& what) : Error(what) {}
};

class DomainViolation : public Error {
public:
    explicit DomainViolation(const std::string& what) : Error(what) {}
};

class NotPSD : public Error {
public:
    explicit NotPSD(const std::string& what) : Error(what) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

class SignChange : public Error {
public:
    explicit SignChange(const std::string& what) : Error(what) {}
};

class SingularOperator : public Error {
public:
    explicit SingularOperator(const std::string& what) : Error(what) {}
};

class DegenerateChord : public Error {
public:
    explicit DegenerateChord(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

class UnknownCheck : public Error {
public:
    explicit UnknownCheck(const std::string& what) : Error(what) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& what) : Error(what) {}
};

} // namespace opbell
