#pragma once

#include "curvlab/corpus.hpp"
#include "curvlab/error.hpp"
#include "curvlab/experiments.hpp"
#include "curvlab/generators.hpp"
#include "curvlab/reports.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/tensor.hpp"
#include "curvlab/tensor_io.hpp"
