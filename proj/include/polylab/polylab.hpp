#pragma once

#include "polylab/error.hpp"
#include "polylab/numerics.hpp"
#include "polylab/monodromy.hpp"
#include "polylab/connections.hpp"
#include "polylab/progressions.hpp"
#include "polylab/liouville.hpp"
#include "polylab/heart.hpp"
