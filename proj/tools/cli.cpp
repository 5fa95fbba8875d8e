#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "msc/batch.hpp"
#include "msc/complexity.hpp"
#include "msc/npy_io.hpp"
#include "msc/phantom.hpp"
#include "msc/stats.hpp"
#include "msc/volume.hpp"

namespace msc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for malformed flags so they map to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ScheduleInfeasible:
    case Errc::InvalidSchedule:
    case Errc::WindowTooLarge:
    case Errc::WindowTooSmall:
      return kInfeasible;
    case Errc::InvalidSpec:
      return kInvalidSpec;
    case Errc::UnknownSubject:
    case Errc::EmptyAfterFiltering:
    case Errc::DegenerateVariance:
    case Errc::TooFewPoints:
    case Errc::OutOfRange:
      return kStatistics;
    default:
      return kIo;
  }
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

void report_error(std::ostream& err, std::string_view name, const std::string& message) {
  err << "error: " << name << ": " << one_line(message) << "\n";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Index> parse_list(const std::string& text, const char* flag) {
  std::vector<Index> values;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw UsageError(std::string(flag) + " expects comma-separated integers, got '" + text + "'");
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return values;
}

Shape3 parse_triple(const std::string& text, const char* flag) {
  const auto v = parse_list(text, flag);
  if (v.size() != 3) throw UsageError(std::string(flag) + " expects X,Y,Z, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

json triple(const Shape3& s) { return json::array({s.x, s.y, s.z}); }

struct ScheduleFlags {
  std::string mode = "algorithm1";
  std::string factors = "1,2,4,8,16,32";
  std::string window = "4,4,4";
  std::string stride = "2,2,2";

  void attach(CLI::App& app) {
    app.add_option("--mode", mode, "algorithm1 | block-cascade | sliding-cascade")->capture_default_str();
    app.add_option("--factors", factors, "coarse-graining factors")->capture_default_str();
    app.add_option("--window", window, "sweep window X,Y,Z (algorithm1)")->capture_default_str();
    app.add_option("--stride", stride, "sweep stride X,Y,Z (algorithm1)")->capture_default_str();
  }

  ScaleSchedule build() const {
    ScaleSchedule s;
    s.mode = parse_mode(mode);
    s.factors = parse_list(factors, "--factors");
    s.window = parse_triple(window, "--window");
    s.stride = parse_triple(stride, "--stride");
    s.validate();
    return s;
  }
};

json schedule_json(const ScaleSchedule& s) {
  return {{"mode", to_string(s.mode)},
          {"factors", s.factors},
          {"requested_window", triple(s.window)},
          {"requested_stride", triple(s.stride)},
          {"log_base", "e"}};
}

json runs_json(const ScaleSchedule& schedule, const std::vector<ScaleRun>& runs) {
  json out = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const ScaleRun& r = runs[k];
    json row = {{"scale_index", k},
                {"scale_factor", r.scale_factor},
                {"step_factor", r.step_factor},
                {"padded_shape", triple(r.padded_shape)},
                {"coarse_shape", triple(r.coarse_shape)},
                {"padding_applied", r.padded}};
    if (schedule.mode == Mode::Algorithm1) {
      row["window"] = triple(r.window);
      row["stride"] = triple(r.stride);
      row["grid"] = triple(r.grid);
      row["degenerate_single_window"] = r.degenerate;
    } else {
      row["window"] = nullptr;
      row["stride"] = nullptr;
      row["kernel_side"] = r.step_factor;
    }
    out.push_back(row);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create directory " + dir.string() + ": " + ec.message());
}

void emit_maps(const fs::path& dir, const std::string& subject, const ProfileResult<double>& result) {
  ensure_dir(dir);
  for (std::size_t k = 0; k < result.maps.size(); ++k)
    write_npy(result.maps[k].values, dir / (subject + "_scale" + std::to_string(k) + "_map.npy"), DType::Float64);
}

std::string sanitize_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// ---------------------------------------------------------------- compute

struct ComputeArgs {
  std::string input;
  std::string subject;
  std::string maps_dir;
  std::string report;
  ScheduleFlags schedule;
};

int cmd_compute(const ComputeArgs& a, std::ostream& out) {
  const ScaleSchedule schedule = a.schedule.build();
  const Volume3D volume = read_npy(a.input);
  const std::string subject = a.subject.empty() ? fs::path(a.input).stem().string() : a.subject;
  const ProfileResult<double> result = multiscale_profile(volume, schedule, subject);

  out << "scale_index,scale_factor,complexity,overlap\n";
  for (const auto& e : result.profile.per_scale)
    out << e.scale_index << "," << e.scale_factor << "," << num(e.complexity) << "," << num(e.overlap) << "\n";

  if (!a.maps_dir.empty()) emit_maps(a.maps_dir, subject, result);
  if (!a.report.empty()) {
    json report = {{"command", "compute"},
                   {"input", a.input},
                   {"subject_id", subject},
                   {"input_shape", triple(volume.shape())},
                   {"schedule", schedule_json(schedule)},
                   {"scales", runs_json(schedule, result.runs)},
                   {"exclusions", json::array()}};
    write_text(a.report, report.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- batch

struct BatchArgs {
  std::string manifest;
  std::string output;
  std::string errors;
  std::string maps_dir;
  std::string report;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool strict = false;
  ScheduleFlags schedule;
};

int cmd_batch(const BatchArgs& a, std::ostream& err) {
  BatchOptions options;
  options.schedule = a.schedule.build();
  options.jobs = std::max(1u, a.jobs);
  options.keep_maps = !a.maps_dir.empty();
  const Manifest manifest = read_manifest(a.manifest);
  const std::vector<SubjectResult> results = run_batch(manifest, options);

  std::string csv = "subject_id,scale_index,scale_factor,complexity\n";
  std::string errors = "subject_id,volume_path,error,message\n";
  json failures = json::array();
  int first_failure = kOk;
  for (const SubjectResult& r : results) {
    if (!r.ok()) {
      errors += sanitize_field(r.subject_id) + "," + sanitize_field(r.volume_path) + "," + r.error_name + "," +
                sanitize_field(one_line(r.error_message)) + "\n";
      failures.push_back({{"subject_id", r.subject_id}, {"error", r.error_name}, {"message", r.error_message}});
      report_error(err, r.error_name, r.subject_id + ": " + r.error_message);
      if (first_failure == kOk) first_failure = r.error_name == "ScheduleInfeasible" ? kInfeasible : kIo;
      continue;
    }
    for (const auto& e : r.result->profile.per_scale)
      csv += r.subject_id + "," + std::to_string(e.scale_index) + "," + std::to_string(e.scale_factor) + "," +
             num(e.complexity) + "\n";
    if (!a.maps_dir.empty()) emit_maps(a.maps_dir, r.subject_id, *r.result);
  }

  const std::string errors_path = a.errors.empty() ? a.output + ".errors.csv" : a.errors;
  write_text(errors_path, errors);
  if (a.strict && first_failure != kOk) return first_failure;
  write_text(a.output, csv);

  if (!a.report.empty()) {
    json subjects = json::array();
    for (const SubjectResult& r : results)
      if (r.ok())
        subjects.push_back({{"subject_id", r.subject_id}, {"scales", runs_json(options.schedule, r.result->runs)}});
    json report = {{"command", "batch"},
                   {"manifest", a.manifest},
                   {"subjects_total", results.size()},
                   {"subjects_failed", failures.size()},
                   {"schedule", schedule_json(options.schedule)},
                   {"subjects", subjects},
                   {"failures", failures}};
    write_text(a.report, report.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
  std::string batch;
  std::string manifest;
  std::string output;
};

std::vector<ComplexityProfile> read_cohort_csv(const fs::path& path, ScaleSchedule& schedule) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MissingColumn, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "subject_id,scale_index,scale_factor,complexity")
    throw Error(Errc::MissingColumn, path.string() + ": header must be subject_id,scale_index,scale_factor,complexity");

  std::vector<ComplexityProfile> profiles;
  std::map<std::string, std::size_t> index;
  std::map<int, Index> factors;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string subject, k, f, c;
    if (!std::getline(ss, subject, ',') || !std::getline(ss, k, ',') || !std::getline(ss, f, ',') ||
        !std::getline(ss, c))
      throw Error(Errc::MalformedRow, path.string() + ": line " + std::to_string(line_no) + " has too few fields");
    ScaleEntry e;
    try {
      e.scale_index = std::stoi(k);
      e.scale_factor = std::stoll(f);
      e.complexity = std::stod(c);
    } catch (const std::exception&) {
      throw Error(Errc::MalformedRow, path.string() + ": line " + std::to_string(line_no) + " is not numeric");
    }
    e.overlap = e.complexity == 0.0 ? 0.0 : -e.complexity;
    factors[e.scale_index] = e.scale_factor;
    auto [it, inserted] = index.emplace(subject, profiles.size());
    if (inserted) profiles.push_back({subject, {}});
    profiles[it->second].per_scale.push_back(e);
  }
  schedule.factors.clear();
  for (const auto& [k, f] : factors) {
    if (k != static_cast<int>(schedule.factors.size()))
      throw Error(Errc::MalformedRow, path.string() + ": scale indices are not contiguous from 0");
    schedule.factors.push_back(f);
  }
  return profiles;
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream& err) {
  const Manifest manifest = read_manifest(a.manifest);
  ScaleSchedule schedule;
  const std::vector<ComplexityProfile> profiles = read_cohort_csv(a.batch, schedule);
  const CorrelationTable table = correlation_table(profiles, manifest, schedule);

  for (const auto& m : table.missing) err << "warning: MissingSubject: " << m << " has no rows in " << a.batch << "\n";
  for (const auto& s : table.skipped) report_error(err, "ScaleSkipped", "scale " + std::to_string(s.scale_index) + ": " + s.reason);

  std::string text = correlation_text(table);
  if (!table.missing.empty()) text += "# subjects missing from batch: " + std::to_string(table.missing.size()) + "\n";
  if (!table.excluded.empty())
    text += "# subject-scale pairs excluded for zero complexity: " + std::to_string(table.excluded.size()) + "\n";
  out << text;

  const fs::path prefix(a.output);
  if (prefix.has_parent_path()) ensure_dir(prefix.parent_path());
  write_text(prefix.string() + ".csv", correlation_csv(table));
  write_text(prefix.string() + ".txt", text);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::string scatter = "log_age,log_C\n";
    for (const XYPair& p : table.scatter[i]) scatter += num(p.y) + "," + num(p.x) + "\n";
    write_text(prefix.string() + "_scatter_scale" + std::to_string(table.rows[i].scale_index) + ".csv", scatter);
  }
  if (table.rows.empty()) {
    report_error(err, "TooFewPoints", "no scale had enough usable subjects for a correlation");
    return kStatistics;
  }
  return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind;
  double level = 1.0;
  long long period = 1;
  std::string shape;
  std::uint64_t seed = 0;
  std::string dtype = "<f8";
  std::string output;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  PhantomSpec spec;
  spec.kind = parse_phantom_kind(a.kind);
  spec.level = a.level;
  spec.period = a.period;
  spec.rng_seed = a.seed;
  try {
    spec.shape = parse_triple(a.shape, "--shape");
  } catch (const UsageError& e) {
    throw Error(Errc::InvalidSpec, e.what());
  }
  const DType dtype = parse_dtype(a.dtype);
  const Volume3D volume = generate_phantom(spec);
  write_npy(volume, a.output, dtype);
  out << describe(spec) << " dtype=" << dtype_code(dtype) << " output=" << a.output << "\n";
  return kOk;
}

// ---------------------------------------------------------------- slice

struct SliceArgs {
  std::string input;
  std::string axis = "z";
  std::string output;
};

int cmd_slice(const SliceArgs& a, std::ostream& out) {
  Axis axis;
  if (a.axis == "x" || a.axis == "X") axis = Axis::X;
  else if (a.axis == "y" || a.axis == "Y") axis = Axis::Y;
  else if (a.axis == "z" || a.axis == "Z") axis = Axis::Z;
  else throw UsageError("--axis must be x, y or z");

  const Volume3D volume = read_npy(a.input);
  const Volume3D::Plane plane = mid_slice(volume, axis);
  const double lo = plane.minCoeff(), hi = plane.maxCoeff();

  // Image columns follow the plane's first axis, rows its second.
  const Index width = plane.rows(), height = plane.cols();
  std::string pgm = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  pgm.reserve(pgm.size() + static_cast<std::size_t>(width * height));
  for (Index row = 0; row < height; ++row)
    for (Index col = 0; col < width; ++col) {
      const double v = plane(col, row);
      const long gray = hi > lo ? std::lround((v - lo) / (hi - lo) * 255.0) : 128;
      pgm.push_back(static_cast<char>(static_cast<unsigned char>(gray)));
    }
  write_text(a.output, pgm);
  out << "wrote " << width << "x" << height << " slice to " << a.output << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiscale structural complexity of 3D volumes", "msc"};
  app.require_subcommand(1);

  ComputeArgs compute;
  auto* sc_compute = app.add_subcommand("compute", "Per-scale complexity of one .npy volume");
  sc_compute->add_option("input", compute.input, ".npy volume")->required();
  sc_compute->add_option("--subject", compute.subject, "subject id used for map file names (default: file stem)");
  sc_compute->add_option("--emit-maps", compute.maps_dir, "directory for <subject>_scale<k>_map.npy files");
  sc_compute->add_option("--report", compute.report, "JSON run report path");
  compute.schedule.attach(*sc_compute);

  BatchArgs batch;
  auto* sc_batch = app.add_subcommand("batch", "Complexity profiles for every subject of a manifest");
  sc_batch->add_option("--manifest", batch.manifest, "CSV subject_id,volume_path,age_years")->required();
  sc_batch->add_option("--output", batch.output, "cohort CSV path")->required();
  sc_batch->add_option("--errors", batch.errors, "error sidecar CSV (default: <output>.errors.csv)");
  sc_batch->add_option("--jobs", batch.jobs, "worker count")->capture_default_str();
  sc_batch->add_flag("--strict", batch.strict, "fail the run on the first subject error");
  sc_batch->add_option("--emit-maps", batch.maps_dir, "directory for complexity maps");
  sc_batch->add_option("--report", batch.report, "JSON run report path");
  batch.schedule.attach(*sc_batch);

  CorrelateArgs correlate;
  auto* sc_corr = app.add_subcommand("correlate", "Age correlation table from a cohort CSV");
  sc_corr->add_option("--batch", correlate.batch, "cohort CSV written by `msc batch`")->required();
  sc_corr->add_option("--manifest", correlate.manifest, "manifest with ages")->required();
  sc_corr->add_option("--output", correlate.output, "output prefix")->required();

  SynthArgs synth;
  auto* sc_synth = app.add_subcommand("synth", "Write a phantom volume");
  sc_synth->add_option("--kind", synth.kind, "constant | white_noise | axis_stripes | smoothed_noise")->required();
  sc_synth->add_option("--level", synth.level, "value, amplitude or smoothing radius")->capture_default_str();
  sc_synth->add_option("--period", synth.period, "stripe period")->capture_default_str();
  sc_synth->add_option("--shape", synth.shape, "X,Y,Z")->required();
  sc_synth->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  sc_synth->add_option("--dtype", synth.dtype, "<f4 or <f8")->capture_default_str();
  sc_synth->add_option("--output", synth.output, ".npy path")->required();

  SliceArgs slice;
  auto* sc_slice = app.add_subcommand("slice", "Mid-slice of a volume as a binary PGM");
  sc_slice->add_option("input", slice.input, ".npy volume")->required();
  sc_slice->add_option("--axis", slice.axis, "x, y or z")->capture_default_str();
  sc_slice->add_option("--output", slice.output, ".pgm path")->required();

  std::vector<const char*> argv{"msc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    report_error(err, "UsageError", e.what());
    return kUsage;
  }

  try {
    if (*sc_compute) return cmd_compute(compute, out);
    if (*sc_batch) return cmd_batch(batch, err);
    if (*sc_corr) return cmd_correlate(correlate, out, err);
    if (*sc_synth) return cmd_synth(synth, out);
    if (*sc_slice) return cmd_slice(slice, out);
  } catch (const Error& e) {
    report_error(err, e.name(), e.what());
    return exit_code_for(e.code());
  } catch (const UsageError& e) {
    report_error(err, "UsageError", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return kIo;
  }
  return kUsage;
}

}  // namespace msc::cli
