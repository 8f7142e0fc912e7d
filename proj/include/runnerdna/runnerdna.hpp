#pragma once

#include "runnerdna/csv.hpp"
#include "runnerdna/dataset.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/eval.hpp"
#include "runnerdna/features.hpp"
#include "runnerdna/forest.hpp"
#include "runnerdna/gps.hpp"
#include "runnerdna/importance.hpp"
#include "runnerdna/indicators.hpp"
#include "runnerdna/ingest.hpp"
#include "runnerdna/pipeline.hpp"
#include "runnerdna/polyfit.hpp"
#include "runnerdna/report.hpp"
#include "runnerdna/rng.hpp"
#include "runnerdna/stats.hpp"
#include "runnerdna/synth.hpp"
#include "runnerdna/types.hpp"
