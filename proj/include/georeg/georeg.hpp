#pragma once

#include "georeg/cloud_prep.hpp"
#include "georeg/elevation.hpp"
#include "georeg/errors.hpp"
#include "georeg/io.hpp"
#include "georeg/knn.hpp"
#include "georeg/metrics.hpp"
#include "georeg/model.hpp"
#include "georeg/nonrigid_warp.hpp"
#include "georeg/pipeline.hpp"
#include "georeg/raster_skeleton.hpp"
#include "georeg/rigid_align.hpp"
#include "georeg/scene_io.hpp"
#include "georeg/synth.hpp"
