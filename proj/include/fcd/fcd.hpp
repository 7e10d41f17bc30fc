#pragma once

#include "fcd/descent.hpp"
#include "fcd/emd.hpp"
#include "fcd/errors.hpp"
#include "fcd/io.hpp"
#include "fcd/mesh.hpp"
#include "fcd/metrics.hpp"
#include "fcd/multi_stage.hpp"
#include "fcd/nn_index.hpp"
#include "fcd/objective.hpp"
#include "fcd/point_cloud.hpp"
#include "fcd/report.hpp"
#include "fcd/sampling.hpp"
#include "fcd/schedule.hpp"
#include "fcd/stalemate.hpp"
#include "fcd/version.hpp"
