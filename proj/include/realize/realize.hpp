#pragma once

/// Umbrella header for the reward realizability library.

#include "realize/binary_po.hpp"
#include "realize/cmp.hpp"
#include "realize/error.hpp"
#include "realize/experiments.hpp"
#include "realize/fixtures.hpp"
#include "realize/io.hpp"
#include "realize/linprog.hpp"
#include "realize/policy_analysis.hpp"
#include "realize/q_learning.hpp"
#include "realize/reward_design.hpp"
#include "realize/samplers.hpp"
#include "realize/task.hpp"
#include "realize/tolerances.hpp"
