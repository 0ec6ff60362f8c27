#pragma once

#include "ringlaw/errors.hpp"
#include "ringlaw/rng.hpp"
#include "ringlaw/parallel.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/freeconv.hpp"
#include "ringlaw/single_ring.hpp"
#include "ringlaw/linalg.hpp"
#include "ringlaw/models.hpp"
#include "ringlaw/locallaw.hpp"
