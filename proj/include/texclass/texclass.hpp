#pragma once

// Umbrella header for the texclass texture-descriptor library.

#include "texclass/bench.hpp"
#include "texclass/classify.hpp"
#include "texclass/code_plane.hpp"
#include "texclass/common.hpp"
#include "texclass/descriptors.hpp"
#include "texclass/evaluate.hpp"
#include "texclass/glcm.hpp"
#include "texclass/histogram.hpp"
#include "texclass/model_io.hpp"
#include "texclass/raster.hpp"
#include "texclass/synth.hpp"
