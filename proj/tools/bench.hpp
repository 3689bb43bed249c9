//
// Copyright (C) 2026 The deltatree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "deltatree/data_io.hpp"

namespace deltatree::cli {

/// Runs the benchmark described by a JSON config, writing one JSON row per
/// measurement to `out`. Progress goes to `log`.
/// Newline-joined rows, the text that gzip is measured on.
std::string plain_text(const Dataset<Sequence>& data);
std::string plain_text(const Dataset<IntSet>& data);

/// Size of `text` after `gzip -9`, or nothing when gzip is unavailable.
std::optional<std::uint64_t> gzip_size(const std::string& text);

void run_bench(const std::filesystem::path& config, std::ostream& out, std::ostream& log);

}  // namespace deltatree::cli
