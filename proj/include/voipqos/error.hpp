// Copyright 2026 The voipqos Authors
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

namespace voipqos {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a documented precondition (negative delay, loss > 1, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A Guaranteed reservation would exceed link capacity.
class AdmissionRefused : public Error {
 public:
  using Error::Error;
};

/// Lookup of a call, flow or knowledge-base entry that does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

/// Scenario / knowledge file could not be parsed or validated. The message
/// names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace voipqos
