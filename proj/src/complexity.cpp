#include "msc/complexity.hpp"

#include <string>

namespace msc {

Mode parse_mode(std::string_view text) {
  if (text == "algorithm1") return Mode::Algorithm1;
  if (text == "block-cascade" || text == "block_cascade") return Mode::BlockCascade;
  if (text == "sliding-cascade" || text == "sliding_cascade") return Mode::SlidingCascade;
  throw Error(Errc::InvalidSchedule, "unknown mode '" + std::string(text) + "'");
}

void ScaleSchedule::validate() const {
  if (factors.empty()) throw Error(Errc::InvalidSchedule, "schedule has no factors");
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (factors[k] < 1) throw Error(Errc::InvalidSchedule, "factor " + std::to_string(factors[k]) + " is < 1");
    if (k > 0 && factors[k] <= factors[k - 1])
      throw Error(Errc::InvalidSchedule, "factors must be strictly increasing");
    if (mode != Mode::Algorithm1 && k > 0 && factors[k] % factors[k - 1] != 0)
      throw Error(Errc::InvalidSchedule, "cascade modes need each factor to divide the next (" +
                                             std::to_string(factors[k - 1]) + " does not divide " +
                                             std::to_string(factors[k]) + ")");
  }
  for (int a = 0; a < 3; ++a) {
    if (window[a] < 2) throw Error(Errc::InvalidSchedule, "window " + to_string(window) + " must be >= 2 per axis");
    if (stride[a] < 1) throw Error(Errc::InvalidSchedule, "stride " + to_string(stride) + " must be >= 1 per axis");
  }
}

}  // namespace msc
