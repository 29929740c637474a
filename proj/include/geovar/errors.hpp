#pragma once

#include <stdexcept>
#include <string>

namespace geovar {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point, or a finite-difference stencil around it, left the chart.
class DomainExit : public Error {
 public:
  using Error::Error;
};

/// |det g| fell below the metric's regularity floor.
class SingularMetric : public Error {
 public:
  using Error::Error;
};

/// Dual-number and finite-difference derivatives disagree.
class EngineDisagreement : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Jet data violating the symmetry of its derivative indices.
class InvalidJet : public Error {
 public:
  using Error::Error;
};

/// Source form that is not affine in the second-order jet coordinates
/// (or that reads third-order data).
class NonAffineSourceForm : public Error {
 public:
  using Error::Error;
};

class MissingMetric : public Error {
 public:
  using Error::Error;
};

/// Field data violating a symmetry invariant (metric, connection, multiplier).
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

class ConstructionFailure : public Error {
 public:
  using Error::Error;
};

/// Derivative nested deeper than the dual scalar tower supports.
class NestingDepthExceeded : public Error {
 public:
  using Error::Error;
};

class UnknownCheck : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace geovar
