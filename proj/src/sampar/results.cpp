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

#include "sampar/results.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sampar/errors.hpp"
#include "sampar/random.hpp"

#ifndef SAMPAR_ENGINE_VERSION
#define SAMPAR_ENGINE_VERSION "unknown"
#endif

namespace sampar {

std::string engine_version() { return SAMPAR_ENGINE_VERSION; }

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> metrics_columns() {
  return {"epoch", "cumulative_wall_seconds", "train_loss", "eval_metric", "nll", "mace",
          "strategy", "P", "S", "global_batch_size"};
}

std::vector<std::string> timing_columns() { return {"epoch", "phase", "seconds"}; }

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double real_cell(const std::string& text, const std::filesystem::path& path) {
  double v = 0.0;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError(path.string() + ": bad number '" + text + "'");
  }
  return v;
}

std::size_t size_cell(const std::string& text, const std::filesystem::path& path) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError(path.string() + ": bad integer '" + text + "'");
  }
  return v;
}

std::string schema_comment(const char* what) {
  return "# sampar " + std::string(what) + " schema v" + std::to_string(kResultsSchemaVersion) + "\n";
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path,
                                                    const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  bool header = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (!header) {
      if (cells != columns) throw ParseError(path.string() + ": unexpected header '" + line + "'");
      header = true;
      continue;
    }
    if (cells.size() != columns.size()) {
      throw ParseError(path.string() + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(columns.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (!header) throw ParseError(path.string() + ": missing header row");
  return rows;
}

std::string manifest_text(const ExperimentConfig& cfg, const std::string& subcommand) {
  std::ostringstream out;
  out << "# sampar run manifest v" << kResultsSchemaVersion << "\n";
  out << "[engine]\n";
  out << "version = " << engine_version() << "\n";
  out << "schema_version = " << kResultsSchemaVersion << "\n";
  out << "subcommand = " << subcommand << "\n\n";
  char hex[3][24];
  std::snprintf(hex[0], sizeof hex[0], "0x%016llX", static_cast<unsigned long long>(kSeedGolden));
  std::snprintf(hex[1], sizeof hex[1], "0x%016llX", static_cast<unsigned long long>(kSeedMixA));
  std::snprintf(hex[2], sizeof hex[2], "0x%016llX", static_cast<unsigned long long>(kSeedMixB));
  out << "[seed_recipe]\n";
  out << "version = " << kSeedRecipeVersion << "\n";
  out << "derivation = splitmix64 chain over (base_seed, tag, epoch, batch, index)\n";
  out << "golden = " << hex[0] << "\n";
  out << "mix_a = " << hex[1] << "\n";
  out << "mix_b = " << hex[2] << "\n";
  out << "tags = initialization:1,weight_sample:2,augmentation:3,shuffle:4,evaluation:5,data:6\n";
  out << "weight_sample_index = global sample index\n";
  out << "augmentation_index = rank (0 when shared)\n\n";
  out << to_ini(cfg);
  return out.str();
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  std::ostringstream out;
  out << schema_comment("metrics") << join(metrics_columns()) << "\n";
  for (const MetricsRecord& r : records) {
    out << join({std::to_string(r.epoch), format_real(r.cumulative_wall_seconds), format_real(r.train_loss),
                 format_real(r.eval_metric), format_real(r.nll), format_real(r.mace), r.strategy,
                 std::to_string(r.world_size), std::to_string(r.samples), std::to_string(r.global_batch_size)})
        << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::vector<MetricsRecord> records;
  for (const auto& c : read_csv_rows(path, metrics_columns())) {
    MetricsRecord r;
    r.epoch = size_cell(c[0], path);
    r.cumulative_wall_seconds = real_cell(c[1], path);
    r.train_loss = real_cell(c[2], path);
    r.eval_metric = real_cell(c[3], path);
    r.nll = real_cell(c[4], path);
    r.mace = real_cell(c[5], path);
    r.strategy = c[6];
    r.world_size = static_cast<int>(size_cell(c[7], path));
    r.samples = size_cell(c[8], path);
    r.global_batch_size = size_cell(c[9], path);
    records.push_back(std::move(r));
  }
  return records;
}

void write_timings_csv(const std::filesystem::path& path, const std::vector<TimingSample>& timings) {
  std::ostringstream out;
  out << schema_comment("timings") << join(timing_columns()) << "\n";
  for (const TimingSample& t : timings) {
    out << join({std::to_string(t.epoch), to_string(t.phase), format_real(t.seconds)}) << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<TimingSample> read_timings_csv(const std::filesystem::path& path) {
  std::vector<TimingSample> out;
  for (const auto& c : read_csv_rows(path, timing_columns())) {
    out.push_back({size_cell(c[0], path), parse_phase(c[1]), real_cell(c[2], path)});
  }
  return out;
}

EmittedFiles emit_results(const std::vector<MetricsRecord>& records, const std::vector<TimingSample>& timings,
                          const std::string& manifest, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  EmittedFiles files{dir / "metrics.csv", dir / "timings.csv", dir / "manifest.ini"};
  write_metrics_csv(files.metrics, records);
  write_timings_csv(files.timings, timings);
  write_text_file(files.manifest, manifest);
  return files;
}

}  // namespace sampar
