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

// Command-line front end: quantize, eval, compare, scatter.

#include <CLI11.hpp>

#include <adaqubo/eval.hpp>
#include <adaqubo/io.hpp>
#include <adaqubo/parallel.hpp>
#include <adaqubo/pipeline.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace adaqubo;

namespace {

struct CommonArgs {
  std::string model;
  std::string data;
  std::string calib_data;
  double calib_frac = 0.1;
  std::uint64_t seed = 42;
  int restarts = 8;
  int sweeps = 0;
  unsigned threads = 0;
};

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_dataset(const DenseNetwork& net, std::span<const Sample> samples, const std::string& name) {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].features.size() != net.input_width())
      throw DataError(name + ": row " + std::to_string(k + 1) + " has " +
                      std::to_string(samples[k].features.size()) + " features, model expects " +
                      std::to_string(net.input_width()));
    if (samples[k].label >= net.output_width())
      throw DataError(name + ": row " + std::to_string(k + 1) + " has label " +
                      std::to_string(samples[k].label) + " but the model has " +
                      std::to_string(net.output_width()) + " classes");
  }
}

/// Calibration rows: the whole --calib-data file, or a seeded random subset
/// of the evaluation data (kept in file order).
std::vector<Sample> calibration_set(const CommonArgs& args, const DenseNetwork& net,
                                    const std::vector<Sample>& data) {
  if (!args.calib_data.empty()) {
    auto calib = load_dataset(args.calib_data);
    check_dataset(net, calib, args.calib_data);
    return calib;
  }
  if (!(args.calib_frac > 0.0 && args.calib_frac <= 1.0))
    throw UsageError("--calib-frac must lie in (0, 1]");
  return calibration_subset(data, args.calib_frac, args.seed);
}

SolveConfig solve_config(const CommonArgs& args) {
  SolveConfig cfg;
  cfg.seed = args.seed;
  cfg.restarts = args.restarts;
  cfg.sweeps = args.sweeps;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool solver_flags) {
  cmd->add_option("--model", args.model, "Float model file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data", args.data, "Dataset CSV (label,f0,f1,...)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--threads", args.threads, "Worker threads; 0 = all cores (results do not depend on it)")
      ->capture_default_str();
  if (!solver_flags) return;
  cmd->add_option("--calib-frac", args.calib_frac,
                  "Fraction of --data used for calibration, sampled with --seed")
      ->capture_default_str();
  cmd->add_option("--calib-data", args.calib_data, "Separate calibration CSV (overrides --calib-frac)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Seed for calibration sampling and annealing")->capture_default_str();
  cmd->add_option("--restarts", args.restarts, "Annealing restarts per subproblem")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sweeps", args.sweeps, "Sweeps per restart; 0 = 100 x subproblem size")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

void print_header(const std::string& command, const CommonArgs& args, std::size_t calib_rows) {
  std::cout << "# adaqubo " << command << " seed=" << args.seed << " rng=" << Rng::kName
            << " calibration_rows=" << calib_rows << "\n";
}

int run_quantize(const CommonArgs& args, int bits, const std::string& method_name, bool exact,
                 const std::string& out, const std::string& plan_out, const std::string& dump_dir) {
  const auto start = std::chrono::steady_clock::now();
  const DenseNetwork net = load_model(args.model);
  const auto data = load_dataset(args.data);
  check_dataset(net, data, args.data);
  const auto calib = calibration_set(args, net, data);
  const Method method = parse_method(method_name);
  const SolveConfig cfg = solve_config(args);
  PipelineOptions options;
  options.threads = args.threads;
  options.exact = exact;

  const Calibration cal = calibrate(net, calib, bits, args.threads);
  RoundingPlan plan = method == Method::adaround ? solve_plan(net, cal, cfg, options) : rtn_plan(net, cal);
  plan.config.calibration_fraction = args.calib_data.empty() ? args.calib_frac : 1.0;
  QuantizedNetwork qnet = method == Method::adaround ? apply_plan(net, cal.scales, plan)
                                                     : quantize_rtn(net, calib, bits);
  qnet.metadata = {{"method", std::string(to_string(method))},
                   {"seed", std::to_string(args.seed)},
                   {"rng", std::string(Rng::kName)},
                   {"calibration_rows", std::to_string(calib.size())}};
  save_quantized(out, qnet);
  if (!plan_out.empty()) save_plan(plan_out, plan);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    for (const auto& batch : cal.batches)
      for (Eigen::Index i = 0; i < batch.neurons(); ++i) {
        std::ostringstream csv;
        write_qubo_csv(csv, batch.subproblem(i));
        write_file_atomic(fs::path(dump_dir) / ("layer" + std::to_string(batch.layer_index) + "_neuron" +
                                                std::to_string(i) + ".csv"),
                          csv.str());
      }
  }

  const auto cost = qubo_cost(cal.batches, plan);
  const auto rtn_cost = qubo_cost(cal.batches, rtn_plan(net, cal));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print_header("quantize", args, calib.size());
  std::cout << "method=" << to_string(method) << " bits=" << bits << " layers=" << net.layers.size()
            << "\n";
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    std::cout << "layer " << l << ": neurons=" << net.layers[l].out_features()
              << " inputs=" << net.layers[l].in_features() << " qubo_cost=" << format_double(cost.per_layer[l])
              << " rtn_qubo_cost=" << format_double(rtn_cost.per_layer[l]) << "\n";
  std::cout << "total_qubo_cost=" << format_double(cost.total) << " seconds=" << shortest(seconds) << "\n";
  std::cout << "layer,i,energy\n";
  for (std::size_t l = 0; l < plan.layers.size(); ++l)
    for (std::size_t i = 0; i < plan.layers[l].energies.size(); ++i)
      std::cout << l << ',' << i << ',' << format_double(plan.layers[l].energies[i]) << '\n';
  return 0;
}

int run_eval(const std::string& model, const std::string& data_path, bool quantized) {
  const auto data = load_dataset(data_path);
  double acc = 0.0;
  if (quantized) {
    const QuantizedNetwork qnet = load_quantized(model);
    const auto width = qnet.layers.front().weights.codes.cols();
    const auto classes = qnet.layers.back().weights.codes.rows();
    for (std::size_t k = 0; k < data.size(); ++k)
      if (data[k].features.size() != width || data[k].label >= classes)
        throw DataError(data_path + ": row " + std::to_string(k + 1) + " does not fit the model");
    acc = accuracy(qnet, data);
  } else {
    const DenseNetwork net = load_model(model);
    check_dataset(net, data, data_path);
    acc = accuracy(net, data);
  }
  std::cout << "accuracy=" << shortest(acc) << "\n";
  return 0;
}

std::vector<int> parse_bits_list(const std::string& text) {
  std::vector<int> bits;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int b = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), b);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw UsageError("--bits-list: '" + item + "' is not an integer");
    check_bits(b);
    bits.push_back(b);
  }
  if (bits.empty()) throw UsageError("--bits-list is empty");
  return bits;
}

int run_compare(const CommonArgs& args, const std::string& bits_list, const std::string& out) {
  const auto bits = parse_bits_list(bits_list);
  const DenseNetwork net = load_model(args.model);
  const auto data = load_dataset(args.data);
  check_dataset(net, data, args.data);
  const auto calib = calibration_set(args, net, data);
  const SolveConfig cfg = solve_config(args);
  PipelineOptions options;
  options.threads = args.threads;

  print_header("compare", args, calib.size());
  std::cout << "float_accuracy=" << shortest(accuracy(net, data)) << "\n";
  std::vector<CompareRow> rows;
  for (int b : bits) {
    const Calibration cal = calibrate(net, calib, b, args.threads);
    const RoundingPlan rtn = rtn_plan(net, cal);
    const RoundingPlan ada = solve_plan(net, cal, cfg, options);
    rows.push_back({b, Method::adaround, accuracy(apply_plan(net, cal.scales, ada), data),
                    qubo_cost(cal.batches, ada).total});
    rows.push_back({b, Method::rtn, accuracy(quantize_rtn(net, calib, b), data), qubo_cost(cal.batches, rtn).total});
  }
  std::ostringstream csv;
  write_compare_csv(csv, rows);
  write_file_atomic(out, csv.str());
  std::cout << csv.str();
  return 0;
}

int run_scatter(const CommonArgs& args, int bits, std::size_t samples, const std::string& out) {
  const DenseNetwork net = load_model(args.model);
  const auto data = load_dataset(args.data);
  check_dataset(net, data, args.data);
  const auto calib = calibration_set(args, net, data);
  const auto rows = scatter_sample(net, calib, data, bits, samples, args.seed, solve_config(args),
                                   args.threads);
  std::ostringstream csv;
  write_scatter_csv(csv, rows);
  write_file_atomic(out, csv.str());

  std::vector<double> cost, acc;
  for (const auto& r : rows)
    if (r.method == Method::random) {
      cost.push_back(r.cost);
      acc.push_back(r.accuracy);
    }
  print_header("scatter", args, calib.size());
  std::cout << "rows=" << rows.size() << " random_plans=" << samples;
  if (cost.size() >= 2) std::cout << " pearson_cost_accuracy=" << shortest(pearson(cost, acc));
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaqubo: post-training quantization of dense networks via per-neuron QUBO rounding"};
  app.require_subcommand(1);

  CommonArgs args;
  int bits = 8;
  std::string method = "adaround";
  std::string out, plan_out, dump_dir, bits_list = "8,4,2,1";
  bool exact = false, quantized = false;
  std::size_t scatter_count = 200;

  auto* quantize = app.add_subcommand("quantize", "Quantize a float model and write the quantized model file");
  add_common(quantize, args, true);
  quantize->add_option("--bits", bits, "Bit width (1-8)")->required()->check(CLI::Range(1, 8));
  quantize->add_option("--method", method, "Rounding method")
      ->required()
      ->check(CLI::IsMember({"adaround", "rtn"}));
  quantize->add_flag("--exact", exact, "Solve subproblems exhaustively when they have at most 24 variables");
  quantize->add_option("--out", out, "Quantized model output (JSON)")->required();
  quantize->add_option("--plan-out", plan_out, "Optional rounding plan output (JSON)");
  quantize->add_option("--dump-qubo", dump_dir, "Optional directory for E[S_i] CSV dumps");

  auto* eval = app.add_subcommand("eval", "Print classification accuracy of a model on a dataset");
  std::string eval_model, eval_data;
  unsigned eval_threads = 0;
  eval->add_option("--model", eval_model, "Model file (float, or quantized with --quantized)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  eval->add_flag("--quantized", quantized, "Treat --model as a quantized model file");
  eval->add_option("--threads", eval_threads, "Accepted for symmetry; evaluation is single-threaded");

  auto* compare = app.add_subcommand("compare", "Accuracy and QUBO cost of both methods per bit width");
  add_common(compare, args, true);
  compare->add_option("--bits-list", bits_list, "Comma-separated bit widths")->capture_default_str();
  compare->add_option("--out", out, "Report CSV (bits,method,accuracy,qubo_cost)")->required();

  auto* scatter = app.add_subcommand("scatter", "QUBO cost vs accuracy for random, RTN and annealed plans");
  add_common(scatter, args, true);
  scatter->add_option("--bits", bits, "Bit width (1-8)")->required()->check(CLI::Range(1, 8));
  scatter->add_option("--samples", scatter_count, "Number of random plans")
      ->required()
      ->check(CLI::PositiveNumber);
  scatter->add_option("--out", out, "Scatter CSV (plan_id,method,cost,accuracy)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (args.threads == 0) args.threads = default_thread_count();
    if (*quantize) return run_quantize(args, bits, method, exact, out, plan_out, dump_dir);
    if (*eval) return run_eval(eval_model, eval_data, quantized);
    if (*compare) return run_compare(args, bits_list, out);
    if (*scatter) return run_scatter(args, bits, scatter_count, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
