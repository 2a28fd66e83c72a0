#pragma once

// Umbrella header: order matters only in that each layer builds on the last.

#include "opbell/errors.hpp"
#include "opbell/rng.hpp"
#include "opbell/functions.hpp"
#include "opbell/matrix.hpp"
#include "opbell/means.hpp"
#include "opbell/maps.hpp"
#include "opbell/constants.hpp"
#include "opbell/checks.hpp"
#include "opbell/harness.hpp"
