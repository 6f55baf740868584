// Copyright 2026 The domino101 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace domino101 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent input data: broken tile conservation, an event for a tile
// that was already seen, a corrupt log record.
class DataError : public Error {
 public:
  using Error::Error;
};

// A move was submitted by a seat that is not on turn.
class TurnError : public Error {
 public:
  using Error::Error;
};

class IllegalMove : public Error {
 public:
  using Error::Error;
};

// A pass was declared while a legal move existed (strict pass mode).
class IllegalPass : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong lifecycle phase (e.g. scoring a live round).
class StateError : public Error {
 public:
  using Error::Error;
};

// Hard constraints on the hidden hands admit no assignment.
class Unsatisfiable : public Error {
 public:
  using Error::Error;
};

}  // namespace domino101
