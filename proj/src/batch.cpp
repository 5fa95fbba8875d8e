#include "msc/batch.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace msc {

std::vector<SubjectResult> run_batch(const Manifest& manifest, const BatchOptions& options) {
  options.schedule.validate();
  const std::size_t n = manifest.entries.size();
  std::vector<SubjectResult> results(n);
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& entry = manifest.entries[i];
      SubjectResult& slot = results[i];
      slot.subject_id = entry.subject_id;
      slot.volume_path = manifest.resolve(entry).string();
      try {
        const Volume3D volume = read_npy(slot.volume_path);
        ProfileResult<double> profile = multiscale_profile(volume, options.schedule, entry.subject_id);
        if (!options.keep_maps) profile.maps.clear();
        slot.result = std::move(profile);
      } catch (const Error& e) {
        slot.error_name = e.name();
        slot.error_message = e.what();
      } catch (const std::exception& e) {
        slot.error_name = "InternalError";
        slot.error_message = e.what();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return results;
}

}  // namespace msc
