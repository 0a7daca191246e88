#pragma once

#include "dsmpepc/geometry.hpp"
#include "dsmpepc/kinematics.hpp"
#include "dsmpepc/world.hpp"
#include "dsmpepc/navigation.hpp"
#include "dsmpepc/cost.hpp"
#include "dsmpepc/optimizer.hpp"
#include "dsmpepc/simulator.hpp"
#include "dsmpepc/scenarios.hpp"
#include "dsmpepc/builtins.hpp"
#include "dsmpepc/report.hpp"
