#ifndef CHROMAMIX_CHROMA_HPP
#define CHROMAMIX_CHROMA_HPP

#include <array>
#include <cstdint>
#include <ostream>

#include "chromamix/audio.hpp"
#include "chromamix/stft.hpp"

namespace chromamix {

inline constexpr int kNumChroma = 12;
// Spectral content below this has no pitch-class meaning (DC, rumble).
inline constexpr double kChromaLowHz = 32.0;

// 12 x F pitch-class energy matrix. Row order is C, C#, D, ..., B
// (class = MIDI note mod 12); entries are folded spectral power.
struct Chromagram {
  std::vector<double> energy; // kNumChroma x num_frames, row-major
  std::size_t num_frames = 0;
  double frame_hop_s = static_cast<double>(kHop) / kSampleRate;

  double& at(int pitch_class, std::size_t frame) {
    return energy[static_cast<std::size_t>(pitch_class) * num_frames + frame];
  }
  double at(int pitch_class, std::size_t frame) const {
    return energy[static_cast<std::size_t>(pitch_class) * num_frames + frame];
  }
  double frame_time(std::size_t frame) const { return static_cast<double>(frame) * frame_hop_s; }
};

struct ChromaVector {
  std::array<double, kNumChroma> values{};

  int argmax() const;
};

// Pitch class per FFT bin (nearest MIDI note), -1 for bins below the
// 32 Hz cutoff. Each retained bin maps to exactly one class.
const std::array<std::int8_t, kNumBins>& chroma_bin_classes();

// |STFT|^2 folded through the pitch-class map.
Chromagram chromagram(const AudioSegment& segment);
Chromagram chromagram_serial(const AudioSegment& segment);
Chromagram fold_power(const Spectrogram& spec);
Chromagram fold_power_serial(const Spectrogram& spec);

// Row-wise time average of a chromagram.
ChromaVector chroma_vector(const Chromagram& cgram);

// One row per frame, 12 comma-separated energy columns.
void write_chroma_csv(const Chromagram& cgram, std::ostream& out);

} // namespace chromamix

#endif
