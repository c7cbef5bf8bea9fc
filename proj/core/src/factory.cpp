/*
 * Copyright 2026 The dfc-nvm Authors
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
#include "dfc/dfc.hpp"

namespace dfc {

std::unique_ptr<DetectableCombiner> make_structure(StructureKind kind, SimulatedNvm& nvm,
                                                   const CombinerConfig& config) {
  switch (kind) {
    case StructureKind::kStack:
      return std::make_unique<DfcStack>(nvm, config);
    case StructureKind::kQueue:
      return std::make_unique<DfcQueue>(nvm, config);
    case StructureKind::kDeque:
      return std::make_unique<DfcDeque>(nvm, config);
  }
  throw Fault("unknown structure kind");
}

}  // namespace dfc
