#pragma once

#include "htlab/dist.hpp"
#include "htlab/matrix.hpp"
#include "htlab/decompose.hpp"
#include "htlab/norms.hpp"
#include "htlab/limits.hpp"
#include "htlab/experiment.hpp"
