#pragma once

#include "polyplate/common.hpp"
#include "polyplate/quadrature.hpp"
#include "polyplate/basis.hpp"
#include "polyplate/mesh.hpp"
#include "polyplate/cvt.hpp"
#include "polyplate/element.hpp"
#include "polyplate/system.hpp"
#include "polyplate/analytic.hpp"
#include "polyplate/verify.hpp"
#include "polyplate/config.hpp"
#include "polyplate/acceptance.hpp"
