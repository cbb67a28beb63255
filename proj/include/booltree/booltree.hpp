// Umbrella header: the whole library in one include.
#pragma once

#include "booltree/binarize.hpp"
#include "booltree/core.hpp"
#include "booltree/dataset.hpp"
#include "booltree/harness.hpp"
#include "booltree/metrics.hpp"
#include "booltree/mip.hpp"
#include "booltree/solver.hpp"
#include "booltree/tree.hpp"
