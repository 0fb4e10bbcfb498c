#pragma once

#include "adam.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "network.hpp"
#include "problems.hpp"
#include "reference.hpp"
#include "rng.hpp"
#include "tape.hpp"
#include "trainer.hpp"
#include "weighting.hpp"
