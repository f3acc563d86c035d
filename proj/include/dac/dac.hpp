/*
 * Copyright 2026 The DAC Authors.
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

/// \file dac.hpp
/// \brief Umbrella header.

#ifndef DAC_DAC_HPP_
#define DAC_DAC_HPP_

#include "dac/common.hpp"
#include "dac/dataset.hpp"
#include "dac/tree.hpp"
#include "dac/ensemble.hpp"
#include "dac/model_io.hpp"
#include "dac/attribution.hpp"
#include "dac/baselines.hpp"
#include "dac/curve_io.hpp"
#include "dac/featlab.hpp"
#include "dac/simlab.hpp"

#endif  // DAC_DAC_HPP_
