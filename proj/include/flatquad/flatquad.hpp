#ifndef FLATQUAD_FLATQUAD_HPP
#define FLATQUAD_FLATQUAD_HPP

// Core library. The file-format and command layer lives under flatquad/io and
// additionally needs yaml-cpp and OpenSSL.

#include "flatquad/control.hpp"
#include "flatquad/errors.hpp"
#include "flatquad/flat_map.hpp"
#include "flatquad/jet.hpp"
#include "flatquad/rigid_body.hpp"
#include "flatquad/sim.hpp"
#include "flatquad/spline.hpp"

#endif
