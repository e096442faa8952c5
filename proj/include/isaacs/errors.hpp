#pragma once

#include <stdexcept>
#include <string>

namespace isaacs {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Step/horizon combination cannot produce a grid (h <= 0 or T <= h^2).
class InvalidStep : public Error {
public:
    using Error::Error;
};

/// The lattice contains no interior space-time point at the requested step.
class EmptyGrid : public Error {
public:
    using Error::Error;
};

/// A stencil read referenced a point outside the grid.
class OutOfGrid : public Error {
public:
    using Error::Error;
};

/// No built-in direction set exists for this dimension.
class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

/// The built-in diffusion decomposition requires strict diagonal dominance.
class DecompositionInfeasible : public Error {
public:
    DecompositionInfeasible(std::string what, int row)
        : Error(std::move(what)), row_(row) {}
    /// Index of the matrix row that broke dominance (-1 if not row-specific).
    int row() const { return row_; }

private:
    int row_ = -1;
};

/// A negative stencil weight was produced (forward drift mode only).
class NonMonotone : public Error {
public:
    using Error::Error;
};

/// A slice fixed-point solve exceeded its iteration budget.
class NoConvergence : public Error {
public:
    NoConvergence(std::string what, double slice_time, double last_change)
        : Error(std::move(what)), slice_time_(slice_time), last_change_(last_change) {}
    double slice_time() const { return slice_time_; }
    double last_change() const { return last_change_; }

private:
    double slice_time_ = 0.0;
    double last_change_ = 0.0;
};

/// Manufactured-case factory was asked for a kind it does not know.
class UnknownKind : public Error {
public:
    using Error::Error;
};

/// Rate fitting received unusable samples (nonpositive, too few, or unordered).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// A quantity that must be monotone in the study parameter was not.
class MonotonicityViolation : public Error {
public:
    using Error::Error;
};

/// A seminorm region contains too few grid points to form any quotient.
class EmptyRegion : public Error {
public:
    using Error::Error;
};

/// The barrier search exhausted its parameter range.
class BarrierSearchFailed : public Error {
public:
    using Error::Error;
};

/// Solver or truncation parameters are inconsistent with the problem.
class InvalidConfiguration : public Error {
public:
    using Error::Error;
};

/// An experiment config failed schema validation; carries the field path.
class ConfigParseError : public Error {
public:
    ConfigParseError(std::string field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace isaacs
