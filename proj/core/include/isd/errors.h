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

#ifndef ISD_ERRORS_H_
#define ISD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace isd {

// Invalid or inconsistent configuration (bad layout, impossible population
// sizes, incompatible experiment flags).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called outside its contract (acting on a finished
// episode, dimension mismatch, missing inputs).
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Persisted data disagrees with itself: unknown ids, truncated logs,
// replay mismatches.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what)
      : std::runtime_error(what) {}
};

// Non-finite values produced by a numeric routine.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isd

#endif  // ISD_ERRORS_H_
