#pragma once

#include "analysis.hpp"
#include "controller.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "interaction.hpp"
#include "metrics.hpp"
#include "perception.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "types.hpp"
#include "vec.hpp"
