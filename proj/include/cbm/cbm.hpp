#pragma once

#include "config.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "gamma.hpp"
#include "model_io.hpp"
#include "neural.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "simulation.hpp"
#include "svg.hpp"
#include "sweep.hpp"
#include "training.hpp"
