/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROWDCL_CROWDCL_HPP
#define CROWDCL_CROWDCL_HPP

#include "crowdcl/aggregate.hpp"
#include "crowdcl/core.hpp"
#include "crowdcl/curriculum.hpp"
#include "crowdcl/difficulty.hpp"
#include "crowdcl/error.hpp"
#include "crowdcl/experiment.hpp"
#include "crowdcl/io.hpp"
#include "crowdcl/metrics.hpp"
#include "crowdcl/net.hpp"
#include "crowdcl/synth.hpp"

#endif
