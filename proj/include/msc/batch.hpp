#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msc/complexity.hpp"
#include "msc/npy_io.hpp"

namespace msc {

struct SubjectResult {
  std::string subject_id;
  std::string volume_path;
  std::optional<ProfileResult<double>> result;  // empty on failure
  std::string error_name;
  std::string error_message;

  bool ok() const { return result.has_value(); }
};

struct BatchOptions {
  ScaleSchedule schedule;
  unsigned jobs = 1;
  bool keep_maps = false;
};

/// Loads and profiles every manifest subject on a bounded pool of `jobs`
/// workers. Results come back in manifest order whatever the completion order;
/// a failing subject is reported in its slot and does not stop the others.
std::vector<SubjectResult> run_batch(const Manifest& manifest, const BatchOptions& options);

}  // namespace msc
