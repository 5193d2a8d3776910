// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef BRIGHTSYNTH_LOG_H_
#define BRIGHTSYNTH_LOG_H_

#include <functional>
#include <string>

namespace brightsynth {

// Progress sink for long-running stages; may be empty.
using LogFn = std::function<void(const std::string&)>;

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_LOG_H_
