/*
 * Copyright 2026 The dsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <json.hpp>

#include "dsim/config.hpp"

namespace dsim::detail {

// Overlays the keys of `doc` onto `cfg` without validating.
void apply_config_json(const nlohmann::json& doc, SimConfig& cfg);
nlohmann::json config_to_json(const SimConfig& cfg);

}  // namespace dsim::detail
