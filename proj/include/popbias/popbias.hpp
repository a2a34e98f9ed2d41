#pragma once

#include "popbias/analysis.hpp"
#include "popbias/csv_io.hpp"
#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/experiment.hpp"
#include "popbias/folds.hpp"
#include "popbias/hash.hpp"
#include "popbias/knn.hpp"
#include "popbias/manifest.hpp"
#include "popbias/metrics.hpp"
#include "popbias/popularity.hpp"
#include "popbias/random.hpp"
#include "popbias/report.hpp"
#include "popbias/skeleton.hpp"
#include "popbias/split.hpp"
#include "popbias/stats.hpp"
#include "popbias/synth.hpp"
