#ifndef LIOUVILLE_ERRORS_HPP
#define LIOUVILLE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace liouville {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorClass { configuration, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

/// Argument outside the domain of a closed form (alpha <= -1, lambda <= 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorClass::configuration, what) {}
};

/// The fundamental pair collapses when l == 1 + alpha.
class DegeneratePairError : public Error {
public:
    explicit DegeneratePairError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class GridSizeError : public Error {
public:
    explicit GridSizeError(const std::string& what) : Error(ErrorClass::configuration, what) {}
};

/// A quadrature or cross-check did not reach its tolerance.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double achieved)
        : Error(ErrorClass::numerical, what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class TailDecayError : public Error {
public:
    TailDecayError(const std::string& what, double exponent)
        : Error(ErrorClass::numerical, what), exponent_(exponent) {}
    double fitted_exponent() const noexcept { return exponent_; }

private:
    double exponent_;
};

/// Step failure in an initial-value integration; carries the radius.
class StepError : public Error {
public:
    StepError(const std::string& what, double radius)
        : Error(ErrorClass::numerical, what), radius_(radius) {}
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

/// Picard iteration failed to converge or its bound grew; carries the delta history.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : Error(ErrorClass::numerical, what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

/// Configuration failure listing every violated invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(ErrorClass::configuration, join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid configuration:";
        for (const auto& p : items) out += "\n  - " + p;
        return out;
    }
    std::vector<std::string> problems_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path)
        : Error(ErrorClass::configuration, what + ": " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace liouville

#endif
