#pragma once

#include "skyrig/bench.hpp"
#include "skyrig/engine.hpp"
#include "skyrig/error.hpp"
#include "skyrig/fuzz.hpp"
#include "skyrig/geodesy.hpp"
#include "skyrig/mission.hpp"
#include "skyrig/monitors.hpp"
#include "skyrig/report.hpp"
#include "skyrig/rng.hpp"
#include "skyrig/scenario.hpp"
#include "skyrig/vehicle.hpp"
#include "skyrig/world.hpp"
