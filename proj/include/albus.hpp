#pragma once

#include "albus/core.hpp"
#include "albus/leaky_bucket.hpp"
#include "albus/albus.hpp"
#include "albus/sketches.hpp"
#include "albus/traffic.hpp"
#include "albus/metrics.hpp"
#include "albus/analysis.hpp"
#include "albus/harness.hpp"
