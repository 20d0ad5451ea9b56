// Copyright 2026 The adaqubo Authors.
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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "adaqubo/eval.hpp"
#include "adaqubo/model.hpp"
#include "adaqubo/pipeline.hpp"

namespace adaqubo {

// Models, quantized models and plans are JSON documents tagged with a
// "format" string and a "version". Doubles are written as the shortest
// decimal that parses back to the same bits. Datasets and reports are CSV
// with LF line endings. All loaders throw DataError with file context and
// reject NaN/Inf; savers write to a temporary file and rename it into place.

inline constexpr int kFormatVersion = 1;

DenseNetwork parse_model(const std::string& text, const std::string& origin = "<memory>");
std::string format_model(const DenseNetwork& net);
DenseNetwork load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const DenseNetwork& net);

QuantizedNetwork parse_quantized(const std::string& text, const std::string& origin = "<memory>");
std::string format_quantized(const QuantizedNetwork& qnet);
QuantizedNetwork load_quantized(const std::filesystem::path& path);
void save_quantized(const std::filesystem::path& path, const QuantizedNetwork& qnet);

RoundingPlan parse_plan(const std::string& text, const std::string& origin = "<memory>");
std::string format_plan(const RoundingPlan& plan);
RoundingPlan load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const RoundingPlan& plan);

/// CSV with header `label,f0,f1,...`.
std::vector<Sample> parse_dataset(std::istream& in, const std::string& origin = "<memory>");
std::vector<Sample> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const Sample> samples);

/// `plan_id,method,cost,accuracy`; numbers with 17 significant digits.
void write_scatter_csv(std::ostream& out, std::span<const ScatterRow> rows);

struct CompareRow {
  int bits = 8;
  Method method = Method::rtn;
  double accuracy = 0.0;
  double qubo_cost = 0.0;
};

/// `bits,method,accuracy,qubo_cost`.
void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);

/// "%.17g"
std::string format_double(double value);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace adaqubo
