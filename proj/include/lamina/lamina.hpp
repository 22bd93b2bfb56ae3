#pragma once

#include "analytic.hpp"
#include "compactset.hpp"
#include "config.hpp"
#include "error.hpp"
#include "immersion.hpp"
#include "intersect.hpp"
#include "mesh_io.hpp"
#include "numeric.hpp"
#include "params.hpp"
#include "pipeline.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "verify.hpp"
