/* Copyright 2026 The lencap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <string>
#include <vector>

namespace lencap {
namespace cli {

// Runs one subcommand (args exclude argv[0]). Exit codes: 0 success,
// 2 usage error, 3 data/format error, 4 incompatibility error.
int run(const std::vector<std::string>& args);

}  // namespace cli
}  // namespace lencap
