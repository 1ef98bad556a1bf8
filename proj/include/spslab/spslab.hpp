#pragma once

#include "error.hpp"
#include "grid.hpp"
#include "coulomb.hpp"
#include "energy.hpp"
#include "parallel.hpp"
#include "minimize.hpp"
#include "constructions.hpp"
#include "inequalities.hpp"
#include "scenarios.hpp"
