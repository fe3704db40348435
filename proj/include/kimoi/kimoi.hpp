// Copyright 2026 The kimoi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "kimoi/analysis/baselines.hpp"
#include "kimoi/analysis/correlation.hpp"
#include "kimoi/error.hpp"
#include "kimoi/geometry/affine.hpp"
#include "kimoi/geometry/delaunay.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/io/binary.hpp"
#include "kimoi/io/config.hpp"
#include "kimoi/io/hash.hpp"
#include "kimoi/io/landmark_io.hpp"
#include "kimoi/io/pipeline.hpp"
#include "kimoi/io/png_io.hpp"
#include "kimoi/io/synth.hpp"
#include "kimoi/lpn/checkpoint.hpp"
#include "kimoi/lpn/config.hpp"
#include "kimoi/lpn/gradcheck.hpp"
#include "kimoi/lpn/layers.hpp"
#include "kimoi/lpn/loss.hpp"
#include "kimoi/lpn/model.hpp"
#include "kimoi/lpn/optimizer.hpp"
#include "kimoi/lpn/train.hpp"
#include "kimoi/morph/image.hpp"
#include "kimoi/morph/morph.hpp"
#include "kimoi/morph/raster.hpp"
#include "kimoi/morph/warp.hpp"
#include "kimoi/parallel.hpp"
#include "kimoi/perturb/perturbation.hpp"
#include "kimoi/perturb/sampler.hpp"
#include "kimoi/random.hpp"
