// Copyright 2026 The duet Authors
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

#ifndef DUET_ERROR_HPP_
#define DUET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace duet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric argument lies outside its documented range.
class InvalidRangeError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// Timesteps passed out of order, or outside the schedule.
class TimestepError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

class UnknownTokenError : public Error {
 public:
  using Error::Error;
};

/// A value that must stay finite (activation, loss, parameter) did not.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data (files, manifests, configs).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An external client (ASR, embedder) failed to answer.
class ClientError : public Error {
 public:
  using Error::Error;
};

}  // namespace duet

#endif  // DUET_ERROR_HPP_
