#pragma once

#include <stdexcept>
#include <string>

namespace fbh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMetric : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct NonPositiveWeight : Error { using Error::Error; };
struct WrongKind : Error { using Error::Error; };
struct NotConformal : Error { using Error::Error; };
struct NonHarmonicFactor : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct NoDescent : Error { using Error::Error; };
struct ScenarioError : Error { using Error::Error; };

}  // namespace fbh
