// Copyright 2026 The gbsim Authors
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

#pragma once

#include "gbs/common.hpp"
#include "gbs/config_io.hpp"
#include "gbs/cost.hpp"
#include "gbs/experiment.hpp"
#include "gbs/gaussian_state.hpp"
#include "gbs/parallel.hpp"
#include "gbs/probability.hpp"
#include "gbs/sample_io.hpp"
#include "gbs/samplers.hpp"
#include "gbs/validation.hpp"
