// Copyright 2026 The rspcap Authors
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

#pragma once

#include "rspcap/builtin_states.hpp"
#include "rspcap/capability.hpp"
#include "rspcap/channels.hpp"
#include "rspcap/correlations.hpp"
#include "rspcap/errors.hpp"
#include "rspcap/io.hpp"
#include "rspcap/linalg.hpp"
#include "rspcap/protocol.hpp"
#include "rspcap/sdp.hpp"
#include "rspcap/states.hpp"
