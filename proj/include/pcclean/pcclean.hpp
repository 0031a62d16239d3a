// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "pcclean/autodiff/checkpoint.hpp"
#include "pcclean/autodiff/init.hpp"
#include "pcclean/autodiff/ops.hpp"
#include "pcclean/autodiff/tensor.hpp"
#include "pcclean/data/contaminate.hpp"
#include "pcclean/data/io.hpp"
#include "pcclean/data/manifest.hpp"
#include "pcclean/data/shapes.hpp"
#include "pcclean/denoiser.hpp"
#include "pcclean/detector.hpp"
#include "pcclean/errors.hpp"
#include "pcclean/eval/bench.hpp"
#include "pcclean/eval/metrics.hpp"
#include "pcclean/geometry.hpp"
#include "pcclean/graph.hpp"
#include "pcclean/network/config.hpp"
#include "pcclean/network/forward.hpp"
#include "pcclean/network/params.hpp"
#include "pcclean/patch.hpp"
#include "pcclean/spatial_index.hpp"
#include "pcclean/training.hpp"
