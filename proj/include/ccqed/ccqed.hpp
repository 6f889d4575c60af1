// ccqed.hpp: umbrella header

#pragma once

#include "ccqed/error.hpp"
#include "ccqed/time_grid.hpp"
#include "ccqed/model_core.hpp"
#include "ccqed/schedule.hpp"
#include "ccqed/dynamics.hpp"
#include "ccqed/pulse_analysis.hpp"
#include "ccqed/schedule_design.hpp"
#include "ccqed/pipeline.hpp"
#include "ccqed/io/config.hpp"
#include "ccqed/io/csv.hpp"
#include "ccqed/io/scenarios.hpp"
