#ifndef HTMPC_HTMPC_HPP_
#define HTMPC_HTMPC_HPP_

#include "htmpc/baselines/apf.hpp"
#include "htmpc/baselines/rrt.hpp"
#include "htmpc/errors.hpp"
#include "htmpc/gain.hpp"
#include "htmpc/generator.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/harness.hpp"
#include "htmpc/integrator.hpp"
#include "htmpc/kinematics.hpp"
#include "htmpc/pattern_search.hpp"
#include "htmpc/planner.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/scenario.hpp"
#include "htmpc/tangent_graph.hpp"
#include "htmpc/tmpc.hpp"
#include "htmpc/tube.hpp"
#include "htmpc/world.hpp"

#endif  // HTMPC_HTMPC_HPP_
