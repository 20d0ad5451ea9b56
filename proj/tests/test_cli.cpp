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

#include <doctest.h>

#include <adaqubo/io.hpp>

#include <filesystem>
#include <sstream>

#include "process.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "adaqubo_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string model_args(const std::string& name) {
  const auto width = name == "micro" ? "12" : "64";
  return "--model '" + testing::fixture(name + "_fixture.json").string() + "' --data '" +
         testing::fixture(std::string("digits") + width + "_test.csv").string() + "'";
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::istringstream in(adaqubo::read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("help documents every flag with its default") {
  const auto top = testing::run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"quantize", "eval", "compare", "scatter"}) CHECK(top.out.find(sub) != std::string::npos);

  const auto q = testing::run_cli("quantize --help");
  CHECK(q.exit_code == 0);
  for (const char* flag : {"--model", "--data", "--bits", "--method", "--calib-frac", "--calib-data", "--seed",
                           "--restarts", "--sweeps", "--exact", "--out", "--plan-out", "--dump-qubo", "--threads"})
    CHECK_MESSAGE(q.out.find(flag) != std::string::npos, flag);
  for (const char* def : {"0.1", "42", "8"}) CHECK(q.out.find(def) != std::string::npos);
  CHECK(testing::run_cli("compare --help").out.find("8,4,2,1") != std::string::npos);
  CHECK(testing::run_cli("scatter --help").out.find("--samples") != std::string::npos);
  CHECK(testing::run_cli("eval --help").out.find("--quantized") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(testing::run_cli("").exit_code == 1);
  CHECK(testing::run_cli("frobnicate").exit_code == 1);
  CHECK(testing::run_cli("scatter " + model_args("mnist1") + " --bits 2 --samples 0 --out '" +
                         scratch("s.csv").string() + "'")
            .exit_code == 1);
  CHECK(testing::run_cli("quantize " + model_args("mnist1") + " --bits 9 --method rtn --out '" +
                         scratch("q.json").string() + "'")
            .exit_code == 1);
  CHECK(testing::run_cli("quantize " + model_args("mnist1") + " --bits 2 --method nearest --out '" +
                         scratch("q.json").string() + "'")
            .exit_code == 1);
  CHECK(testing::run_cli("compare " + model_args("mnist1") + " --bits-list 2,x --out '" +
                         scratch("c.csv").string() + "'")
            .exit_code == 1);
  CHECK(testing::run_cli("quantize " + model_args("mnist1") + " --bits 2 --method rtn --calib-frac 1.5 --out '" +
                         scratch("q.json").string() + "'")
            .exit_code == 1);
}

TEST_CASE("data errors exit with 2") {
  const auto bad = scratch("bad_model.json");
  adaqubo::write_file_atomic(bad, "{\"format\":\"adaqubo-model\",\"version\":1,\"layers\":[");
  CHECK(testing::run_cli("eval --model '" + bad.string() + "' --data '" +
                         testing::fixture("digits64_test.csv").string() + "'")
            .exit_code == 2);
  // 12-feature rows against a 64-input model.
  CHECK(testing::run_cli("eval --model '" + testing::fixture("mnist1_fixture.json").string() + "' --data '" +
                         testing::fixture("digits12_test.csv").string() + "'")
            .exit_code == 2);
  const auto nan_csv = scratch("nan.csv");
  adaqubo::write_file_atomic(nan_csv, "label,f0\n1,nan\n");
  CHECK(testing::run_cli("eval --model '" + testing::fixture("mnist1_fixture.json").string() + "' --data '" +
                         nan_csv.string() + "'")
            .exit_code == 2);
}

TEST_CASE("eval prints the float accuracy") {
  const auto r = testing::run_cli("eval " + model_args("mnist1"));
  CHECK(r.exit_code == 0);
  CHECK(r.out == "accuracy=0.946\n");
}

TEST_CASE("int8 round-to-nearest model evaluates within half a point of float") {
  const auto out = scratch("rtn8.json");
  const auto q = testing::run_cli("quantize " + model_args("mnist1") + " --bits 8 --method rtn --out '" +
                                  out.string() + "'");
  REQUIRE(q.exit_code == 0);
  CHECK(q.out.rfind("# adaqubo quantize seed=42 rng=mt19937_64 calibration_rows=50\n", 0) == 0);
  CHECK(q.out.find("layer,i,energy\n0,0,") != std::string::npos);
  const auto f = testing::run_cli("eval " + model_args("mnist1"));
  const auto e = testing::run_cli("eval --quantized --model '" + out.string() + "' --data '" +
                                  testing::fixture("digits64_test.csv").string() + "'");
  REQUIRE(e.exit_code == 0);
  const double float_acc = std::stod(testing::value_after(f.out, "accuracy="));
  const double q_acc = std::stod(testing::value_after(e.out, "accuracy="));
  CHECK(std::abs(q_acc - float_acc) <= 0.005);
}

TEST_CASE("quantize writes plans and subproblem dumps") {
  const auto out = scratch("ada_micro.json");
  const auto plan = scratch("ada_micro_plan.json");
  const auto dump = scratch("dump");
  fs::remove_all(dump);
  const auto r = testing::run_cli("quantize " + model_args("micro") + " --bits 2 --method adaround --exact --out '" +
                                  out.string() + "' --plan-out '" + plan.string() + "' --dump-qubo '" +
                                  dump.string() + "' --threads 2");
  REQUIRE(r.exit_code == 0);
  const auto loaded = adaqubo::load_plan(plan);
  CHECK(loaded.config.exact);
  CHECK(loaded.method == adaqubo::Method::adaround);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dump)) {
    ++files;
    const auto rows = read_csv(entry.path());
    CHECK(rows.size() == 13);
    CHECK(rows[0].size() == 13);
  }
  CHECK(files == 10);
  CHECK(adaqubo::load_quantized(out).metadata.at("method") == "adaround");
}

TEST_CASE("compare reports both methods per bit width") {
  const auto out = scratch("compare.csv");
  const auto r = testing::run_cli("compare " + model_args("micro") + " --bits-list 8,2 --out '" + out.string() + "'");
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"bits", "method", "accuracy", "qubo_cost"});
  CHECK(rows[1][0] == "8");
  CHECK(rows[1][1] == "adaround");
  CHECK(rows[2][1] == "rtn");
  CHECK(rows[3][0] == "2");
  for (std::size_t k : {1u, 3u}) CHECK(std::stod(rows[k][3]) <= std::stod(rows[k + 1][3]));
}

TEST_CASE("scatter writes count plus two rows") {
  const auto out = scratch("scatter.csv");
  const auto r = testing::run_cli("scatter " + model_args("micro") + " --bits 2 --samples 5 --seed 3 --out '" +
                                  out.string() + "'");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("seed=3") != std::string::npos);
  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 8);
  CHECK(rows[6][1] == "rtn");
  CHECK(rows[7][1] == "adaround");
}
