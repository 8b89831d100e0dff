#pragma once

#include "steinlab/diff_profile.hpp"
#include "steinlab/distance.hpp"
#include "steinlab/distributions.hpp"
#include "steinlab/error.hpp"
#include "steinlab/eval_tensor.hpp"
#include "steinlab/functional.hpp"
#include "steinlab/mc.hpp"
#include "steinlab/model_io.hpp"
#include "steinlab/normal_bounds.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/pipeline.hpp"
#include "steinlab/poisson_bounds.hpp"
#include "steinlab/prob_model.hpp"
#include "steinlab/report.hpp"
#include "steinlab/report_io.hpp"
#include "steinlab/rng.hpp"
