// Copyright 2026 The isd-evo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef ISD_CHECKPOINT_H_
#define ISD_CHECKPOINT_H_

// Self-describing dump of both populations plus everything needed to
// resume a run exactly. Stored as JSON or as its CBOR encoding; readers
// detect which from the first byte.

#include <cstdint>
#include <string>
#include <vector>

#include "isd/evolution.h"
#include "isd/matchmaking.h"
#include "isd/random.h"

namespace isd {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::int64_t episodes_done = 0;
  std::int64_t episodes_since_evolution = 0;
  std::string config_text;
  Rng control_rng;
  NetShape net_shape;
  int num_players = 0;
  Populations pops;
  std::vector<CoopRecord> coop;
};

// format: "cbor" or "json".
void write_checkpoint(const Checkpoint& ckpt, const std::string& path,
                      const std::string& format);
// Throws IntegrityError on a malformed or version-mismatched file.
Checkpoint read_checkpoint(const std::string& path);

}  // namespace isd

#endif  // ISD_CHECKPOINT_H_
