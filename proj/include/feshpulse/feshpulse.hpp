#pragma once

#include "feshpulse/asymptotics.hpp"
#include "feshpulse/constants.hpp"
#include "feshpulse/dissstate.hpp"
#include "feshpulse/dynamics.hpp"
#include "feshpulse/errors.hpp"
#include "feshpulse/io.hpp"
#include "feshpulse/optimize.hpp"
#include "feshpulse/pulse.hpp"
#include "feshpulse/specfun.hpp"
#include "feshpulse/spectrum.hpp"
