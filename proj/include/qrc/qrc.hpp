#pragma once

// Umbrella header.

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/experiments.hpp"
#include "qrc/features.hpp"
#include "qrc/linalg.hpp"
#include "qrc/parallel.hpp"
#include "qrc/randmat.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/rng.hpp"
#include "qrc/stats.hpp"
#include "qrc/tasks.hpp"
#include "qrc/tolerances.hpp"
