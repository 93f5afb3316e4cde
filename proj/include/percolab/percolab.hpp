#pragma once

#include "percolab/calibration.hpp"
#include "percolab/component_graphs.hpp"
#include "percolab/csv.hpp"
#include "percolab/graph.hpp"
#include "percolab/harness.hpp"
#include "percolab/limit_oracle.hpp"
#include "percolab/mmspace.hpp"
#include "percolab/multiplicative.hpp"
#include "percolab/nbrw.hpp"
#include "percolab/percolation.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"
#include "percolab/union_find.hpp"
