#ifndef EVSCHED_EVSCHED_HPP
#define EVSCHED_EVSCHED_HPP

#include "evsched/analysis.hpp"
#include "evsched/branch_and_bound.hpp"
#include "evsched/common.hpp"
#include "evsched/fleet.hpp"
#include "evsched/milp.hpp"
#include "evsched/pv.hpp"
#include "evsched/rng.hpp"
#include "evsched/scenario.hpp"
#include "evsched/scheduler.hpp"
#include "evsched/simplex.hpp"
#include "evsched/tariff.hpp"

#endif // EVSCHED_EVSCHED_HPP
