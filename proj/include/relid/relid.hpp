#pragma once

// Umbrella header: on-line fuzzy relational identification of a SISO
// process, with a simulated motor drive as the test plant.

#include "relid/cli.hpp"
#include "relid/csv.hpp"
#include "relid/errors.hpp"
#include "relid/experiment.hpp"
#include "relid/fuzzy_algebra.hpp"
#include "relid/identifier.hpp"
#include "relid/metrics.hpp"
#include "relid/partition.hpp"
#include "relid/plant.hpp"
#include "relid/series.hpp"
#include "relid/smoothing.hpp"
#include "relid/snapshot.hpp"
