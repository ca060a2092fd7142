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

#ifndef HIDM_TOOLS_CLI_HPP
#define HIDM_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hidm::cli {

enum ExitCode { ok = 0, validation = 1, io = 2 };

/// args excludes the program name. Normal output goes to `out`, diagnostics
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hidm::cli

#endif // HIDM_TOOLS_CLI_HPP
