#pragma once

// Umbrella header for the broken-basis wavelet library.

#include "bbw/errors.hpp"
#include "bbw/linalg.hpp"
#include "bbw/quadrature.hpp"
#include "bbw/smooth_family.hpp"
#include "bbw/knots.hpp"
#include "bbw/hermite.hpp"
#include "bbw/broken_basis.hpp"
#include "bbw/refinement.hpp"
#include "bbw/lifting.hpp"
#include "bbw/transform.hpp"
#include "bbw/io.hpp"
