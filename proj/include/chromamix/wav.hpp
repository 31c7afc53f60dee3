#ifndef CHROMAMIX_WAV_HPP
#define CHROMAMIX_WAV_HPP

#include <filesystem>

#include "chromamix/audio.hpp"

namespace chromamix {

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  std::size_t frames = 0;
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

// Header-only probe; does not decode samples.
WavInfo wav_info(const std::filesystem::path& path);

// Reads a RIFF/WAV file (PCM 16/24/32-bit or float32), downmixes
// multi-channel input by channel averaging, and resamples to target_rate.
// Integer PCM is normalized by the type's full-scale divisor.
AudioSegment load_wav(const std::filesystem::path& path, int target_rate = kSampleRate);

// Writes 32-bit float WAV. No clipping or normalization: a later
// load_wav at the same rate reproduces the samples bit-exactly.
void save_wav(const AudioSegment& segment, const std::filesystem::path& path);

} // namespace chromamix

#endif
