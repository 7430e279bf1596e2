#pragma once

#include "dirsim/analytic_dirichlet.hpp"
#include "dirsim/coeff_map.hpp"
#include "dirsim/errors.hpp"
#include "dirsim/execute.hpp"
#include "dirsim/integrator.hpp"
#include "dirsim/linalg.hpp"
#include "dirsim/processes.hpp"
#include "dirsim/random.hpp"
#include "dirsim/run_config.hpp"
#include "dirsim/simplex.hpp"
#include "dirsim/special_functions.hpp"
#include "dirsim/stats.hpp"
