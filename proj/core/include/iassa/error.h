// Copyright 2026 The IASSA Authors. All Rights Reserved.
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

#ifndef IASSA_ERROR_H_
#define IASSA_ERROR_H_

#include <stdexcept>
#include <string>

namespace iassa {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad dimensions, ranges, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its content is not a supported format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A computation produced or received non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Failures at the black-box boundary. Subclasses distinguish the transport
// (process died, timeout), the protocol (malformed or unexpected messages)
// and the contract (well-formed messages that violate declared capabilities).
class OracleError : public Error {
 public:
  using Error::Error;
};

class TransportError : public OracleError {
 public:
  using OracleError::OracleError;
};

class ProtocolError : public OracleError {
 public:
  using OracleError::OracleError;
};

class ContractError : public OracleError {
 public:
  using OracleError::OracleError;
};

// The remote side answered with {"ok":false,...}.
class RemoteError : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace iassa

#endif  // IASSA_ERROR_H_
