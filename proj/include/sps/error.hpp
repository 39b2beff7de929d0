#pragma once

#include <stdexcept>
#include <string>

namespace sps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SPS_DEFINE_ERROR(InvalidArgument);
SPS_DEFINE_ERROR(TargetBelowGap);
SPS_DEFINE_ERROR(StepTooLarge);
SPS_DEFINE_ERROR(PeriodTooShort);
SPS_DEFINE_ERROR(NoPeak);
SPS_DEFINE_ERROR(NonConvergence);
SPS_DEFINE_ERROR(Degenerate);
SPS_DEFINE_ERROR(NoOscillation);
SPS_DEFINE_ERROR(OutOfRange);

#undef SPS_DEFINE_ERROR

}  // namespace sps
