#pragma once

#include "dme/error.hpp"
#include "dme/random.hpp"
#include "dme/parallel.hpp"
#include "dme/linalg.hpp"
#include "dme/hadamard.hpp"
#include "dme/transforms.hpp"
#include "dme/eigen.hpp"
#include "dme/estimators.hpp"
#include "dme/pipeline.hpp"
#include "dme/calibration.hpp"
#include "dme/harness.hpp"
#include "dme/data.hpp"
#include "dme/tasks.hpp"
