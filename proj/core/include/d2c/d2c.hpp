/*
 Copyright 2026 The d2c Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include "d2c/closed_loop.hpp"
#include "d2c/cost.hpp"
#include "d2c/environment.hpp"
#include "d2c/estimation.hpp"
#include "d2c/feedback.hpp"
#include "d2c/ilqr.hpp"
#include "d2c/io.hpp"
#include "d2c/noise.hpp"
#include "d2c/parallel.hpp"
#include "d2c/random.hpp"
#include "d2c/riccati_oracle.hpp"
#include "d2c/scaling.hpp"
#include "d2c/trajectory.hpp"
#include "d2c/types.hpp"
