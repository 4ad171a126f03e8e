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

#include "openfsp/dap_tagger.hpp"
#include "openfsp/dataset.hpp"
#include "openfsp/embedding.hpp"
#include "openfsp/errors.hpp"
#include "openfsp/evalharness.hpp"
#include "openfsp/head.hpp"
#include "openfsp/matcher.hpp"
#include "openfsp/ontology.hpp"
#include "openfsp/registry.hpp"
#include "openfsp/text.hpp"
