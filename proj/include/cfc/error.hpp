#pragma once

#include <stdexcept>
#include <string>

namespace cfc {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownBody : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedMode : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Carries the final KKT residuals of a QP solve that hit its iteration cap.
struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, double stationarity, double feasibility,
                 double complementarity)
      : std::runtime_error(what),
        stationarity(stationarity),
        feasibility(feasibility),
        complementarity(complementarity) {}
  double stationarity;
  double feasibility;
  double complementarity;
};

}  // namespace cfc
