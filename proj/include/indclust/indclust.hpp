// Umbrella header.
#pragma once

#include "indclust/common.hpp"
#include "indclust/rng.hpp"
#include "indclust/core.hpp"
#include "indclust/quantizer.hpp"
#include "indclust/finite_dist.hpp"
#include "indclust/datagen.hpp"
#include "indclust/estimators.hpp"
#include "indclust/clustering.hpp"
#include "indclust/io.hpp"
