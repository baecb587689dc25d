#pragma once

// Everything except the network service (coriolis/server.hpp pulls in Boost).

#include "coriolis/error.hpp"
#include "coriolis/haptics.hpp"
#include "coriolis/live_session.hpp"
#include "coriolis/protocol.hpp"
#include "coriolis/rotframe.hpp"
#include "coriolis/scenarios.hpp"
#include "coriolis/study.hpp"
#include "coriolis/vec3.hpp"
