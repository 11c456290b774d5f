/*
   Copyright 2026 The invlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "invlab/experiments.hpp"

namespace invlab {

/// Command-line overrides layered on top of the configuration file.
struct RunConfig {
    std::string subcommand;
    std::optional<std::filesystem::path> config_path;
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<Strictness> mode;
    bool save_trajectories = false;

    void apply(ExperimentConfig& cfg) const;
};

/// Strict-schema JSON to config: unknown keys, wrong types and inadmissible
/// exponents are errors. Missing keys keep their defaults.
ExperimentConfig parse_config_text(std::string_view json_text);
/// Reads `path`; with `echo_dir` the resolved config is written to
/// echo_dir/config.echo.json.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& echo_dir = std::nullopt);
/// Every key with its resolved value.
std::string config_to_json_text(const ExperimentConfig& cfg);
std::filesystem::path write_config_echo(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// SPF1 snapshot format: "SPF1", u32 d, u32 N (d times), f64 R, u8 kind
// (0 real samples, 1 spectral), u8 ncomp, then ncomp little-endian arrays of
// f64 samples or (re, im) pairs in row-major order. Spectral payloads run
// over m_j = -N/2 .. N/2 - 1 on every axis.
std::string encode_field(const VectorField& v);
std::string encode_real_field(const std::vector<RealField>& components);
/// Spectral result for either kind; FormatError on malformed input.
VectorField decode_field(std::string_view bytes);
/// Kind-0 payloads only.
std::vector<RealField> decode_real_field(std::string_view bytes);
/// Kind byte of an encoded field (0 or 1).
int field_kind(std::string_view bytes);

void write_field(const std::filesystem::path& path, const VectorField& v);
void write_real_field(const std::filesystem::path& path, const std::vector<RealField>& components);
VectorField read_field(const std::filesystem::path& path);
std::vector<RealField> read_real_field(const std::filesystem::path& path);

/// Snapshots of u(t) as out_dir/traj/<run_id>/t<index>.spf, the initial
/// field as initial.spf, sample times and per-step diagnostics as CSV.
void write_trajectory(const std::filesystem::path& out_dir, const std::string& run_id, const Trajectory& traj);

/// CSV with columns experiment,n,eps,t,quantity,value,verdict; throws
/// ArgumentError on duplicate (experiment, n, eps, t, quantity) keys.
std::string records_csv(const std::vector<ResultRecord>& records);
/// Verdict tallies plus the measured constants (slopes, ratios, brackets,
/// c0 proxy), each copied from a record.
std::string summary_json(const std::vector<ResultRecord>& records, std::uint64_t seed);

struct ReportPaths {
    std::filesystem::path csv;
    std::filesystem::path summary;
};
ReportPaths write_report(const std::vector<ResultRecord>& records, const std::filesystem::path& out_dir,
                         std::uint64_t seed);

} // namespace invlab
