#pragma once

// Umbrella header for the dynamic-optimization toolkit.

#include "dynopt/baselines.hpp"
#include "dynopt/environment.hpp"
#include "dynopt/harness.hpp"
#include "dynopt/hga.hpp"
#include "dynopt/local_search.hpp"
#include "dynopt/metrics.hpp"
#include "dynopt/objective.hpp"
#include "dynopt/report.hpp"
#include "dynopt/rng.hpp"
