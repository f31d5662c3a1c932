/*
 * Copyright 2026 The sliceaudit Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace sliceaudit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// A metric whose definition does not apply to the given input (empty rows,
/// zero reference value, too few rows for an effect size).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Bad query parameters or configuration. Surfaces as HTTP 400.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace sliceaudit
