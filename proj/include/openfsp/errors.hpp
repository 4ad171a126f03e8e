// Copyright 2026 The OpenFSP Authors.
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
#include <utility>

namespace openfsp {

// Base class of all toolkit errors. kind() is a stable identifier the CLI
// uses when emitting JSON error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define OPENFSP_DEFINE_ERROR(Name)                 \
  class Name : public Error {                      \
   public:                                         \
    explicit Name(const std::string& message)      \
        : Error(#Name, message) {}                 \
  };

// Ontology / dataset.
OPENFSP_DEFINE_ERROR(UnknownLabel)
OPENFSP_DEFINE_ERROR(MalformedTree)
OPENFSP_DEFINE_ERROR(NestedIntent)
OPENFSP_DEFINE_ERROR(MissingDomain)

// Embedding providers.
OPENFSP_DEFINE_ERROR(DimensionMismatch)
OPENFSP_DEFINE_ERROR(ProviderUnavailable)
OPENFSP_DEFINE_ERROR(CacheCorrupt)

// Classification head.
OPENFSP_DEFINE_ERROR(DegenerateData)
OPENFSP_DEFINE_ERROR(ProviderMismatch)

// Tagger.
OPENFSP_DEFINE_ERROR(EmptyTrainingSet)

// Matcher.
OPENFSP_DEFINE_ERROR(Ineligible)
OPENFSP_DEFINE_ERROR(NoEligibleFrame)

// Registry.
OPENFSP_DEFINE_ERROR(SchemaError)
OPENFSP_DEFINE_ERROR(UnknownAgnosticType)
OPENFSP_DEFINE_ERROR(DuplicateTemplate)

// Metrics.
OPENFSP_DEFINE_ERROR(LengthMismatch)

#undef OPENFSP_DEFINE_ERROR

}  // namespace openfsp
