#pragma once

// Umbrella header: pulls in the whole deltashell library.

#include "deltashell/bs_operator.hpp"
#include "deltashell/capacity.hpp"
#include "deltashell/cli.hpp"
#include "deltashell/common.hpp"
#include "deltashell/config.hpp"
#include "deltashell/extrapolation.hpp"
#include "deltashell/harmonics.hpp"
#include "deltashell/mesh.hpp"
#include "deltashell/panel_integrals.hpp"
#include "deltashell/perturbation.hpp"
#include "deltashell/quadrature.hpp"
#include "deltashell/report.hpp"
#include "deltashell/spectrum.hpp"
#include "deltashell/surface.hpp"
