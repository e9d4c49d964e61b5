// Copyright 2026 The loopsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Umbrella header for the loop model library.

#pragma once
#ifndef LOOPSIM_LOOPSIM_HPP
#define LOOPSIM_LOOPSIM_HPP

#include "loopsim/geometry.hpp"
#include "loopsim/configuration.hpp"
#include "loopsim/serialization.hpp"
#include "loopsim/loops.hpp"
#include "loopsim/coloring.hpp"
#include "loopsim/statistics.hpp"
#include "loopsim/sampler.hpp"
#include "loopsim/cubes.hpp"
#include "loopsim/events.hpp"
#include "loopsim/path.hpp"
#include "loopsim/quantum.hpp"
#include "loopsim/estimators.hpp"

#endif  // LOOPSIM_LOOPSIM_HPP
