#pragma once

#include "cmlab/rng.hpp"
#include "cmlab/degree_sequence.hpp"
#include "cmlab/generator.hpp"
#include "cmlab/components.hpp"
#include "cmlab/tilt.hpp"
#include "cmlab/theory.hpp"
#include "cmlab/exploration.hpp"
#include "cmlab/critical.hpp"
#include "cmlab/stats.hpp"
#include "cmlab/config.hpp"
#include "cmlab/harness.hpp"
