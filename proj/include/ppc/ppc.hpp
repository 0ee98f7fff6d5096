#pragma once

#include "ppc/base64.hpp"
#include "ppc/camera.hpp"
#include "ppc/common.hpp"
#include "ppc/critic.hpp"
#include "ppc/datagen.hpp"
#include "ppc/external_critic.hpp"
#include "ppc/frame.hpp"
#include "ppc/geometry.hpp"
#include "ppc/image.hpp"
#include "ppc/image_io.hpp"
#include "ppc/mesh.hpp"
#include "ppc/metrics.hpp"
#include "ppc/objective.hpp"
#include "ppc/optimizer.hpp"
#include "ppc/parallel.hpp"
#include "ppc/proposals.hpp"
#include "ppc/random.hpp"
#include "ppc/rasterizer.hpp"
#include "ppc/runner.hpp"
#include "ppc/serialization.hpp"
#include "ppc/shapes.hpp"
