#pragma once

// Umbrella header for the whole laboratory.

#include "fbl/core.hpp"
#include "fbl/estimate.hpp"
#include "fbl/experiment.hpp"
#include "fbl/fblnorm.hpp"
#include "fbl/homfn.hpp"
#include "fbl/json_io.hpp"
#include "fbl/phmap.hpp"
#include "fbl/space.hpp"
#include "fbl/summing.hpp"
#include "fbl/verify.hpp"
#include "fbl/witnesses.hpp"
