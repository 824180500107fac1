#pragma once

// Umbrella header.

#include "aoi/chain_model.hpp"
#include "aoi/csv.hpp"
#include "aoi/distribution.hpp"
#include "aoi/errors.hpp"
#include "aoi/freshness.hpp"
#include "aoi/gittins.hpp"
#include "aoi/info_metrics.hpp"
#include "aoi/loss.hpp"
#include "aoi/multi_source.hpp"
#include "aoi/penalty.hpp"
#include "aoi/rng.hpp"
#include "aoi/service.hpp"
#include "aoi/simulator.hpp"
#include "aoi/single_source.hpp"
#include "aoi/timeseries.hpp"
