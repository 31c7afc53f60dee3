#include "chromamix/audio.hpp"

#include <cmath>

#include "chromamix/errors.hpp"

namespace chromamix {

const char* stem_role_name(StemRole role) {
  switch (role) {
    case StemRole::vocal: return "vocal";
    case StemRole::accompaniment: return "accompaniment";
    case StemRole::mixture: return "mixture";
  }
  return "?";
}

StemRole parse_stem_role(const std::string& name) {
  if (name == "vocal") return StemRole::vocal;
  if (name == "accompaniment") return StemRole::accompaniment;
  if (name == "mixture") return StemRole::mixture;
  raise(ErrorKind::validation, "unknown stem role: " + name);
}

AudioSegment slice(const AudioSegment& segment, double start_s, double duration_s) {
  if (start_s < 0.0 || duration_s < 0.0)
    raise(ErrorKind::bounds, "slice window must be nonnegative");
  auto start = static_cast<std::size_t>(std::llround(start_s * segment.sample_rate));
  auto count = static_cast<std::size_t>(std::llround(duration_s * segment.sample_rate));
  if (start > segment.samples.size() || count > segment.samples.size() - start)
    raise(ErrorKind::bounds, "slice window [" + std::to_string(start_s) + ", " +
                                 std::to_string(start_s + duration_s) + ") exceeds segment of " +
                                 std::to_string(segment.duration_s()) + " s");
  AudioSegment out;
  out.samples.assign(segment.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     segment.samples.begin() + static_cast<std::ptrdiff_t>(start + count));
  out.sample_rate = segment.sample_rate;
  out.song_id = segment.song_id;
  out.stem = segment.stem;
  out.offset_s = segment.offset_s + start_s;
  return out;
}

} // namespace chromamix
