#include "chromamix/chroma.hpp"

#include <cmath>

#include "chromamix/errors.hpp"

namespace chromamix {

namespace {

std::array<std::int8_t, kNumBins> build_bin_classes() {
  std::array<std::int8_t, kNumBins> classes{};
  for (int k = 0; k < kNumBins; ++k) {
    double freq = static_cast<double>(k) * kSampleRate / kDftSize;
    if (freq < kChromaLowHz) {
      classes[static_cast<std::size_t>(k)] = -1;
      continue;
    }
    auto midi = static_cast<long>(std::lround(69.0 + 12.0 * std::log2(freq / 440.0)));
    classes[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(((midi % 12) + 12) % 12);
  }
  return classes;
}

template <bool Parallel>
Chromagram fold_impl(const Spectrogram& spec) {
  const auto& classes = chroma_bin_classes();
  Chromagram out;
  out.num_frames = spec.num_frames;
  out.frame_hop_s = static_cast<double>(spec.hop) / spec.sample_rate;
  out.energy.assign(static_cast<std::size_t>(kNumChroma) * out.num_frames, 0.0);

#pragma omp parallel for schedule(static) if (Parallel)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(spec.num_frames); ++t) {
    const auto* bins = spec.frame(static_cast<std::size_t>(t));
    for (int k = 0; k < kNumBins; ++k) {
      int c = classes[static_cast<std::size_t>(k)];
      if (c >= 0) out.at(c, static_cast<std::size_t>(t)) += std::norm(bins[k]);
    }
  }
  return out;
}

} // namespace

const std::array<std::int8_t, kNumBins>& chroma_bin_classes() {
  static const auto classes = build_bin_classes();
  return classes;
}

Chromagram fold_power(const Spectrogram& spec) { return fold_impl<true>(spec); }
Chromagram fold_power_serial(const Spectrogram& spec) { return fold_impl<false>(spec); }

Chromagram chromagram(const AudioSegment& segment) {
  if (segment.samples.empty()) raise(ErrorKind::empty_input, "chromagram of empty segment");
  return fold_power(stft(segment));
}

Chromagram chromagram_serial(const AudioSegment& segment) {
  if (segment.samples.empty()) raise(ErrorKind::empty_input, "chromagram of empty segment");
  return fold_power_serial(stft_serial(segment));
}

ChromaVector chroma_vector(const Chromagram& cgram) {
  if (cgram.num_frames == 0) raise(ErrorKind::empty_input, "chroma vector of empty chromagram");
  ChromaVector v;
  for (int c = 0; c < kNumChroma; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < cgram.num_frames; ++t) sum += cgram.at(c, t);
    v.values[static_cast<std::size_t>(c)] = sum / static_cast<double>(cgram.num_frames);
  }
  return v;
}

int ChromaVector::argmax() const {
  int best = 0;
  for (int c = 1; c < kNumChroma; ++c)
    if (values[static_cast<std::size_t>(c)] > values[static_cast<std::size_t>(best)]) best = c;
  return best;
}

void write_chroma_csv(const Chromagram& cgram, std::ostream& out) {
  out << "C,C#,D,D#,E,F,F#,G,G#,A,A#,B\n";
  for (std::size_t t = 0; t < cgram.num_frames; ++t) {
    for (int c = 0; c < kNumChroma; ++c) {
      if (c) out << ',';
      out << cgram.at(c, t);
    }
    out << '\n';
  }
}

} // namespace chromamix
