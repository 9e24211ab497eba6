#pragma once

#include "destin/bridge.hpp"
#include "destin/filter_bank.hpp"
#include "destin/intent.hpp"
#include "destin/intent_grid.hpp"
#include "destin/lti.hpp"
#include "destin/numerics.hpp"
#include "destin/pipeline.hpp"
#include "destin/simulate.hpp"
#include "destin/trajectory.hpp"
