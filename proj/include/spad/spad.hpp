#pragma once

#include "spad/broker.hpp"
#include "spad/channel.hpp"
#include "spad/content.hpp"
#include "spad/core.hpp"
#include "spad/economics.hpp"
#include "spad/mobility.hpp"
#include "spad/reputation.hpp"
#include "spad/stackelberg.hpp"
#include "spad/learning.hpp"
#include "spad/sim.hpp"
