#ifndef CHROMAMIX_AUDIO_HPP
#define CHROMAMIX_AUDIO_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace chromamix {

// Everything downstream of ingestion runs at this rate.
inline constexpr int kSampleRate = 16000;

enum class StemRole { vocal, accompaniment, mixture };

const char* stem_role_name(StemRole role);
StemRole parse_stem_role(const std::string& name);

// A mono waveform slice with provenance. Samples are nominally in [-1, 1]
// but remix sums may exceed that; nothing clips.
struct AudioSegment {
  std::vector<float> samples;
  int sample_rate = kSampleRate;
  std::string song_id;
  StemRole stem = StemRole::mixture;
  double offset_s = 0.0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  bool empty() const { return samples.empty(); }
};

// Window [start_s, start_s + duration_s) of a segment. The result keeps
// provenance and advances offset_s by start_s.
AudioSegment slice(const AudioSegment& segment, double start_s, double duration_s);

} // namespace chromamix

#endif
