#pragma once

// Umbrella header: the full spinsim surface. Individual headers can be
// included on their own; config.hpp additionally pulls in the vendored
// nlohmann/json single header.

#include <spinsim/qops.hpp>
#include <spinsim/model.hpp>
#include <spinsim/states.hpp>
#include <spinsim/dynamics.hpp>
#include <spinsim/discord.hpp>
#include <spinsim/nmrtools.hpp>
#include <spinsim/runner.hpp>
#include <spinsim/config.hpp>
