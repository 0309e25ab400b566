// SPDX-License-Identifier: Apache-2.0
//
// isac-tilt: ISAC clutter heat map simulation and antenna tilt failure analysis
// Copyright (C) 2026 The isac-tilt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "isac_tilt/antenna.hpp"
#include "isac_tilt/channel.hpp"
#include "isac_tilt/config.hpp"
#include "isac_tilt/core.hpp"
#include "isac_tilt/detection.hpp"
#include "isac_tilt/estimation.hpp"
#include "isac_tilt/experiment.hpp"
#include "isac_tilt/export.hpp"
#include "isac_tilt/fft.hpp"
#include "isac_tilt/pipeline.hpp"
#include "isac_tilt/rng.hpp"
#include "isac_tilt/scene.hpp"
#include "isac_tilt/waveform.hpp"
