#pragma once

// Umbrella header for the whole library.

#include "ofdmce/bench.hpp"
#include "ofdmce/channel.hpp"
#include "ofdmce/classical.hpp"
#include "ofdmce/common.hpp"
#include "ofdmce/dlmodels.hpp"
#include "ofdmce/fxp.hpp"
#include "ofdmce/grid.hpp"
#include "ofdmce/io.hpp"
#include "ofdmce/neural.hpp"
