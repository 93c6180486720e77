// Copyright (c) 2026 The sampar Authors. All Rights Reserved.
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

namespace sampar {

// Exception hierarchy. Each leaf maps onto one process exit code / C API
// status (see exit_code_for in launcher.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's mathematical domain (log of a non-positive value).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Precondition of an API call violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Peer disconnect, timeout or malformed traffic. Maps to exit code 3.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Ranks disagree about the collective sequence or parameter state. Exit code 3.
class DesyncError : public TransportError {
 public:
  using TransportError::TransportError;
};

// Ranks contributed buffers of different lengths. Exit code 3.
class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

// This rank stopped because another rank failed first. Exit code 3.
class AbortedError : public TransportError {
 public:
  using TransportError::TransportError;
};

// Non-finite loss during training. Maps to exit code 4.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file contents.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace sampar
