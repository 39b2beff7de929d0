#pragma once

#include "sps/atom_dynamics.hpp"
#include "sps/constants.hpp"
#include "sps/emission.hpp"
#include "sps/error.hpp"
#include "sps/estimators.hpp"
#include "sps/filter.hpp"
#include "sps/noise.hpp"
#include "sps/qubit_spectrum.hpp"
#include "sps/scattering.hpp"
#include "sps/time_trace.hpp"

namespace sps {
inline constexpr const char* kVersion = "0.1.0";
}
