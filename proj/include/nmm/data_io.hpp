#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmm/losses.hpp"
#include "nmm/trace.hpp"

namespace nmm {

// libsvm text: "label idx:val idx:val ..." with 1-based, strictly increasing
// indices. '#' starts a comment.
struct LibsvmOptions {
  Task task = Task::Classification;
  // Force the column count; indices beyond it are an error. Otherwise p is
  // the largest index seen.
  std::optional<Index> num_features;
};

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& opts = {});
Dataset read_libsvm(const std::filesystem::path& path, const LibsvmOptions& opts = {});
// Labels and values are written in shortest round-trip form; zeros are omitted.
void write_libsvm(const Dataset& d, std::ostream& out);
void write_libsvm(const Dataset& d, const std::filesystem::path& path);

struct SyntheticSpec {
  Index n = 200;
  Index p = 50;
  Index sparsity = 5;
  double noise_sd = 0.0;
  std::uint64_t seed = 42;
  Task task = Task::Regression;
};

struct SyntheticProblem {
  Dataset data;
  Vector true_w;
};

// Gaussian design and support drawn from a counter-based generator keyed by
// the seed, so every entry depends only on (seed, stream, index).
SyntheticProblem synth_generate(const SyntheticSpec& spec);

// FNV-1a over the raw bytes of the dense design (row-major), targets and p.
std::uint64_t dataset_checksum(const Dataset& d);

// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

enum class TraceFormat { Csv, Json };

// Values echoed into the JSON trace alongside the records.
struct TraceMetadata {
  std::string scheme;
  std::string penalty;
  double lambda = 0.0;
  double shape = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  // Written under "diagnostics" when not null.
  nlohmann::json diagnostics;
};

// CSV header: iter,objective,step_norm,residual,elapsed_sec
void write_trace_csv(const IterateTrace& trace, std::ostream& out);
void write_trace_json(const IterateTrace& trace, const TraceMetadata& meta, std::ostream& out);
void write_trace(const IterateTrace& trace, TraceFormat format, const std::filesystem::path& path,
                 const TraceMetadata& meta = {});

std::vector<IterateRecord> read_trace_csv(std::istream& in);
std::vector<IterateRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace nmm
