/*
 * Copyright 2026 The hidm Authors
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

#ifndef HIDM_CONFIG_HPP
#define HIDM_CONFIG_HPP

// JSON structure descriptions.
//
//   {"type":"hidm","layers":[<layer 1>, ..., <layer L>]}
//   {"type":"ppm","base":{<lut fragment>,"num_dms":L},"positions":[N_2, ...]}
//   <fragment>
//
// Fragments:
//   {"dm":"lut","N":10,"k":16,"num_dms":4,"alphabet_size":4}
//   {"dm":"ccdm","composition":[16,8,5,3]}
//   {"dm":"ccdm","compositions":[[...],[...]]}      several DMs in one layer
//   {"dm":"ess","N":32,"k":51,"alphabet_size":4}
//
// alphabet_size is required at layer 1 and, when given above it, must
// equal the DM count of the layer below. Unknown keys are rejected.

#include <stdexcept>
#include <string>

#include "hidm/core.hpp"

namespace hidm {

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Throws Error(Config) for schema violations and propagates builder errors.
DmPtr load_structure(std::string_view json_text);
DmPtr load_structure_file(const std::string& path);

std::string read_file(const std::string& path);

} // namespace hidm

#endif // HIDM_CONFIG_HPP
