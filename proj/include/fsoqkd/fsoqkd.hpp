// Copyright 2026 The fsoqkd Authors
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

// Umbrella header.

#include "fsoqkd/errors.hpp"
#include "fsoqkd/numeric.hpp"
#include "fsoqkd/quadrature.hpp"
#include "fsoqkd/channel_model.hpp"
#include "fsoqkd/quantum_noise.hpp"
#include "fsoqkd/info_bounds.hpp"
#include "fsoqkd/eavesdropper.hpp"
#include "fsoqkd/skr_engine.hpp"
#include "fsoqkd/config.hpp"
#include "fsoqkd/sweep.hpp"
#include "fsoqkd/output.hpp"
