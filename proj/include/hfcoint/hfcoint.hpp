#pragma once

#include "hfcoint/cointtest.hpp"
#include "hfcoint/errors.hpp"
#include "hfcoint/estimate.hpp"
#include "hfcoint/experiments.hpp"
#include "hfcoint/grid.hpp"
#include "hfcoint/io.hpp"
#include "hfcoint/limitdist.hpp"
#include "hfcoint/preprocess.hpp"
#include "hfcoint/rng.hpp"
#include "hfcoint/simulate.hpp"
#include "hfcoint/stats.hpp"
