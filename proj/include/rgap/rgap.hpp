#pragma once

#include "rgap/errors.hpp"
#include "rgap/lattice.hpp"
#include "rgap/parallel.hpp"
#include "rgap/riesz.hpp"
#include "rgap/setbuilder.hpp"
#include "rgap/spectrum.hpp"
