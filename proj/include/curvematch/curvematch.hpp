#pragma once

#include "curvematch/errors.hpp"
#include "curvematch/splines.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/geodesic_ivp.hpp"
#include "curvematch/karcher.hpp"
#include "curvematch/stats.hpp"
#include "curvematch/ingestion.hpp"
#include "curvematch/io.hpp"
#include "curvematch/svg.hpp"
