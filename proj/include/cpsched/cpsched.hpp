#pragma once

// Umbrella header for the whole library.

#include "cpsched/baselines.hpp"
#include "cpsched/cost_model.hpp"
#include "cpsched/dp_solver.hpp"
#include "cpsched/errors.hpp"
#include "cpsched/io.hpp"
#include "cpsched/packer.hpp"
#include "cpsched/planner.hpp"
#include "cpsched/profiler_fit.hpp"
#include "cpsched/rng.hpp"
#include "cpsched/types.hpp"
#include "cpsched/validate.hpp"
#include "cpsched/workload.hpp"
