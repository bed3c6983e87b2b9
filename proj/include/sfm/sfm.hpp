#pragma once

#include "sfm/classify.hpp"
#include "sfm/dataset.hpp"
#include "sfm/errors.hpp"
#include "sfm/mc.hpp"
#include "sfm/model.hpp"
#include "sfm/moments.hpp"
#include "sfm/solver.hpp"
