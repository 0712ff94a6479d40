#pragma once

#include "vtalign/evo.hpp"
#include "vtalign/geometry.hpp"
#include "vtalign/image_io.hpp"
#include "vtalign/inspect.hpp"
#include "vtalign/mimetric.hpp"
#include "vtalign/pipeline.hpp"
#include "vtalign/raster.hpp"
#include "vtalign/resample.hpp"
#include "vtalign/version.hpp"
