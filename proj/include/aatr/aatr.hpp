#pragma once

#include "aatr/benchmark.hpp"
#include "aatr/dataio.hpp"
#include "aatr/dataset.hpp"
#include "aatr/de.hpp"
#include "aatr/fitter.hpp"
#include "aatr/grid.hpp"
#include "aatr/model_io.hpp"
#include "aatr/objectives.hpp"
#include "aatr/rectangles.hpp"
#include "aatr/ridge.hpp"
#include "aatr/simgen.hpp"
