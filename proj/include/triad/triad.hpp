#pragma once

#include "triad/channel.hpp"
#include "triad/clustering.hpp"
#include "triad/config.hpp"
#include "triad/error.hpp"
#include "triad/geometry.hpp"
#include "triad/harness.hpp"
#include "triad/noma_power.hpp"
#include "triad/special_functions.hpp"
