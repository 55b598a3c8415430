#pragma once

#include "errors.hpp"
#include "material.hpp"
#include "mechanics.hpp"
#include "solver.hpp"
#include "experiments.hpp"
#include "stats.hpp"
#include "calibration.hpp"
#include "config.hpp"
#include "io.hpp"
