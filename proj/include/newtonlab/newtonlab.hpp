#pragma once

#include "newtonlab/blaschke.hpp"
#include "newtonlab/channel.hpp"
#include "newtonlab/complex_util.hpp"
#include "newtonlab/newton.hpp"
#include "newtonlab/orbit.hpp"
#include "newtonlab/poly.hpp"
#include "newtonlab/raster.hpp"
#include "newtonlab/rat_map.hpp"
#include "newtonlab/report.hpp"
#include "newtonlab/roots.hpp"
#include "newtonlab/surgery.hpp"
