#pragma once

#include "cfhb/error.hpp"
#include "cfhb/params.hpp"
#include "cfhb/pwl.hpp"
#include "cfhb/waveforms.hpp"
#include "cfhb/metrics.hpp"
#include "cfhb/sweep.hpp"
#include "cfhb/config.hpp"
#include "cfhb/cli.hpp"
