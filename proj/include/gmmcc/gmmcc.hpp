#pragma once

#include "gmmcc/rng.hpp"
#include "gmmcc/linalg.hpp"
#include "gmmcc/source.hpp"
#include "gmmcc/measurement.hpp"
#include "gmmcc/classifier.hpp"
#include "gmmcc/bounds.hpp"
#include "gmmcc/monte_carlo.hpp"
#include "gmmcc/scenario.hpp"
