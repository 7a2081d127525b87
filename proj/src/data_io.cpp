#include "nmm/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace nmm {

namespace {

constexpr const char* kCsvHeader = "iter,objective,step_norm,residual,elapsed_sec";

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_long(std::string_view tok, long& out) {
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t j = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stateless generator: draw(stream, i) depends only on (seed, stream, i).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    const std::uint64_t key = mix64(seed_ ^ mix64(stream));
    return mix64(key + 0x9E3779B97F4A7C15ULL * (counter + 1));
  }

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t stream, std::uint64_t counter) const {
    const double u1 = uniform(stream, 2 * counter);
    const double u2 = uniform(stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t seed_;
};

enum Stream : std::uint64_t { kDesign = 1, kSupport, kMagnitude, kSign, kNoise };

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& opts) {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> labels;
  long max_index = 0;
  long line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto toks = split_ws(view);
    if (toks.empty()) continue;

    double label = 0.0;
    if (!parse_double(toks[0], label) || !std::isfinite(label)) {
      throw ParseError("malformed label '" + std::string(toks[0]) + "'", line_no);
    }
    const long row = static_cast<long>(labels.size());
    labels.push_back(label);

    long prev = 0;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const auto tok = toks[t];
      const auto colon = tok.find(':');
      long idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos || !parse_long(tok.substr(0, colon), idx) ||
          !parse_double(tok.substr(colon + 1), val) || !std::isfinite(val)) {
        throw ParseError("malformed token '" + std::string(tok) + "'", line_no);
      }
      if (idx < 1) throw ParseError("feature index must be >= 1", line_no);
      if (idx <= prev) {
        throw ParseError("feature indices must be strictly increasing (" + std::to_string(prev) +
                             " then " + std::to_string(idx) + ")",
                         line_no);
      }
      if (opts.num_features && idx > *opts.num_features) {
        throw ParseError("feature index " + std::to_string(idx) + " exceeds p = " +
                             std::to_string(*opts.num_features),
                         line_no);
      }
      prev = idx;
      max_index = std::max(max_index, idx);
      entries.emplace_back(row, idx - 1, val);
    }
  }
  if (labels.empty()) throw ParseError("no samples", line_no);

  Vector y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  if (opts.task == Task::Classification) {
    const std::set<double> distinct(labels.begin(), labels.end());
    bool pm_one = true, zero_one = true;
    for (double v : distinct) {
      pm_one = pm_one && (v == 1.0 || v == -1.0);
      zero_one = zero_one && (v == 0.0 || v == 1.0);
    }
    if (!pm_one && zero_one) {
      for (Index i = 0; i < y.size(); ++i) y[i] = y[i] == 0.0 ? -1.0 : 1.0;
    } else if (!pm_one) {
      throw ParseError("classification labels must be {-1,+1} or {0,1}", 0);
    }
  }

  const Index p = opts.num_features ? *opts.num_features : std::max<Index>(max_index, 1);
  SparseRowMatrix x(static_cast<Index>(labels.size()), p);
  x.setFromTriplets(entries.begin(), entries.end());
  return Dataset(std::move(x), std::move(y), opts.task);
}

Dataset read_libsvm(const std::filesystem::path& path, const LibsvmOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_libsvm(in, opts);
}

void write_libsvm(const Dataset& d, std::ostream& out) {
  const SparseRowMatrix& x = d.design();
  for (Index i = 0; i < d.n(); ++i) {
    const double y = d.targets()[i];
    out << (d.task() == Task::Classification && y > 0 ? "+1" : format_double(y));
    for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) {
      if (it.value() == 0.0) continue;
      out << ' ' << (it.col() + 1) << ':' << format_double(it.value());
    }
    out << '\n';
  }
}

void write_libsvm(const Dataset& d, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_libsvm(d, out);
  finish(out, path);
}

SyntheticProblem synth_generate(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw std::invalid_argument("synthetic n and p must be >= 1");
  if (spec.sparsity < 0 || spec.sparsity > spec.p) {
    throw std::invalid_argument("synthetic sparsity k must satisfy 0 <= k <= p");
  }
  if (!(spec.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");

  const CounterRng rng(spec.seed);
  const auto n = static_cast<std::uint64_t>(spec.n);
  const auto p = static_cast<std::uint64_t>(spec.p);

  Matrix x(spec.n, spec.p);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < p; ++j) {
      x(static_cast<Index>(i), static_cast<Index>(j)) = rng.normal(kDesign, i * p + j);
    }
  }

  // Partial Fisher-Yates for the support.
  std::vector<Index> perm(spec.p);
  for (Index j = 0; j < spec.p; ++j) perm[j] = j;
  Vector w = Vector::Zero(spec.p);
  for (Index t = 0; t < spec.sparsity; ++t) {
    const double u = rng.uniform(kSupport, static_cast<std::uint64_t>(t));
    const Index pick = t + std::min<Index>(static_cast<Index>(u * static_cast<double>(spec.p - t)),
                                           spec.p - t - 1);
    std::swap(perm[t], perm[pick]);
    const double mag = 0.5 + 1.5 * rng.uniform(kMagnitude, static_cast<std::uint64_t>(t));
    const double sign = rng.uniform(kSign, static_cast<std::uint64_t>(t)) < 0.5 ? -1.0 : 1.0;
    w[perm[t]] = sign * mag;
  }

  Vector y = x * w;
  if (spec.noise_sd > 0.0) {
    for (std::uint64_t i = 0; i < n; ++i) y[static_cast<Index>(i)] += spec.noise_sd * rng.normal(kNoise, i);
  }
  if (spec.task == Task::Classification) {
    for (Index i = 0; i < y.size(); ++i) y[i] = y[i] < 0.0 ? -1.0 : 1.0;
  }
  return {Dataset::from_dense(x, std::move(y), spec.task), std::move(w)};
}

std::uint64_t dataset_checksum(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[2] = {static_cast<std::int64_t>(d.n()), static_cast<std::int64_t>(d.p())};
  feed(dims, sizeof dims);
  const Matrix dense(d.design());
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      feed(&v, sizeof v);
    }
  }
  feed(d.targets().data(), sizeof(double) * static_cast<std::size_t>(d.targets().size()));
  return h;
}

void write_trace_csv(const IterateTrace& trace, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const IterateRecord& r : trace.records) {
    out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.step_norm) << ','
        << format_double(r.residual) << ',' << format_double(r.elapsed_sec) << '\n';
  }
}

void write_trace_json(const IterateTrace& trace, const TraceMetadata& meta, std::ostream& out) {
  nlohmann::json records = nlohmann::json::array();
  for (const IterateRecord& r : trace.records) {
    records.push_back({{"iter", r.iter},
                       {"objective", r.objective},
                       {"step_norm", r.step_norm},
                       {"residual", r.residual},
                       {"elapsed_sec", r.elapsed_sec}});
  }
  nlohmann::json config = {{"method", trace.method},
                           {"scheme", meta.scheme},
                           {"mu", meta.mu},
                           {"lambda", meta.lambda},
                           {"penalty", meta.penalty},
                           {"shape", meta.shape}};
  if (meta.has_seed) config["seed"] = meta.seed;

  nlohmann::json doc = {{"config", config},
                        {"iterations", trace.iterations},
                        {"converged", trace.converged},
                        {"final_objective", trace.final_objective},
                        {"final_residual", trace.final_residual},
                        {"records", records}};
  if (!meta.diagnostics.is_null()) doc["diagnostics"] = meta.diagnostics;
  out << doc.dump(2) << '\n';
}

void write_trace(const IterateTrace& trace, TraceFormat format, const std::filesystem::path& path,
                 const TraceMetadata& meta) {
  auto out = open_out(path);
  if (format == TraceFormat::Csv) {
    write_trace_csv(trace, out);
  } else {
    write_trace_json(trace, meta, out);
  }
  finish(out, path);
}

std::vector<IterateRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError("trace CSV header must be '" + std::string(kCsvHeader) + "'", 1);
  }
  std::vector<IterateRecord> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view view(line);
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      fields.push_back(view.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    IterateRecord r;
    if (fields.size() != 5 || !parse_long(fields[0], r.iter) ||
        !parse_double(fields[1], r.objective) || !parse_double(fields[2], r.step_norm) ||
        !parse_double(fields[3], r.residual) || !parse_double(fields[4], r.elapsed_sec)) {
      throw ParseError("malformed trace row", line_no);
    }
    out.push_back(r);
  }
  return out;
}

std::vector<IterateRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace_csv(in);
}

}  // namespace nmm
