// Copyright 2026 The openset Authors. All Rights Reserved.
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

#include "openset/error.hpp"

namespace openset {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::MissingImage: return "MissingImage";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::EmptyVector: return "EmptyVector";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::FeatureMismatch: return "FeatureMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NoKnownGroundTruth: return "NoKnownGT";
    case ErrorKind::NoUnknownGroundTruth: return "NoUnknownGT";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace openset
