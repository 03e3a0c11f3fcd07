#pragma once

#include "branch_bound.hpp"
#include "fuzzy.hpp"
#include "io.hpp"
#include "milp.hpp"
#include "mps.hpp"
#include "nexus.hpp"
#include "planner.hpp"
#include "robust.hpp"
#include "simplex.hpp"
