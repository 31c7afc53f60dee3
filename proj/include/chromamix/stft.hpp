#ifndef CHROMAMIX_STFT_HPP
#define CHROMAMIX_STFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "chromamix/audio.hpp"

namespace chromamix {

inline constexpr int kDftSize = 1024;
inline constexpr int kHop = 256;
inline constexpr int kNumBins = kDftSize / 2 + 1; // 513

struct Spectrogram {
  std::vector<std::complex<double>> data; // num_frames x num_bins, row-major
  std::size_t num_frames = 0;
  std::size_t num_bins = kNumBins;
  int dft_size = kDftSize;
  int hop = kHop;
  int sample_rate = kSampleRate;

  std::complex<double>* frame(std::size_t f) { return data.data() + f * num_bins; }
  const std::complex<double>* frame(std::size_t f) const { return data.data() + f * num_bins; }
  std::complex<double>& at(std::size_t f, std::size_t k) { return data[f * num_bins + k]; }
  const std::complex<double>& at(std::size_t f, std::size_t k) const {
    return data[f * num_bins + k];
  }
};

struct RealMatrix {
  std::vector<double> data; // rows x cols, row-major
  std::size_t rows = 0;
  std::size_t cols = 0;

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Hann-windowed, reflect-padded (centered) forward transform, no
// normalization. Frame count is 1 + floor((n + dft_size - dft_size) / hop)
// on the padded signal; a 10 s segment yields 626 frames.
Spectrogram stft(const AudioSegment& segment);
Spectrogram stft_serial(const AudioSegment& segment);

// Windowed overlap-add synthesis normalized by the summed squared window.
// istft(stft(x), x.size()) reconstructs x to well under 1e-6.
AudioSegment istft(const Spectrogram& spec, std::size_t length);
AudioSegment istft_serial(const Spectrogram& spec, std::size_t length);

RealMatrix magnitude(const Spectrogram& spec);

// The analysis window (periodic Hann, kDftSize points); shared with tests.
const std::vector<double>& stft_window();

} // namespace chromamix

#endif
