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
#ifndef BRIGHTSYNTH_RUNTIME_H_
#define BRIGHTSYNTH_RUNTIME_H_

namespace brightsynth {

// Keeps large tensor buffers on the heap instead of fresh mmap'd pages, so
// repeated forward/backward passes do not page-fault on every allocation.
// Call once at program start.
void TuneAllocator();

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_RUNTIME_H_
