#pragma once

#include "osp/baselines.hpp"
#include "osp/errors.hpp"
#include "osp/fim.hpp"
#include "osp/parallel.hpp"
#include "osp/pipeline.hpp"
#include "osp/priors.hpp"
#include "osp/solver.hpp"
#include "osp/structural_model.hpp"
