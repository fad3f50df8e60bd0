#pragma once

#include <stdexcept>
#include <string>

namespace vslcav {

inline constexpr double kMetersPerMile = 1609.344;
inline constexpr double kMpsPerMph = 0.44704;

constexpr double mph_to_mps(double mph) { return mph * kMpsPerMph; }
constexpr double mps_to_mph(double mps) { return mps / kMpsPerMph; }
constexpr double miles_to_meters(double miles) { return miles * kMetersPerMile; }
constexpr double meters_to_miles(double meters) { return meters / kMetersPerMile; }

// Posted limits on the corridor are bounded to this range (mph).
inline constexpr double kMinPostedMph = 30.0;
inline constexpr double kMaxPostedMph = 70.0;

/// Invalid static configuration (geometry, parameters, overrides).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vslcav
