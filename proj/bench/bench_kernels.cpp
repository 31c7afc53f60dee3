// Timing comparison of the OpenMP kernels against their serial references.
#include <cstdio>
#include <vector>

#include <omp.h>

#include "chromamix/chroma.hpp"
#include "chromamix/resample.hpp"
#include "chromamix/rng.hpp"
#include "chromamix/stft.hpp"

using namespace chromamix;

namespace {

AudioSegment noise(std::size_t n, std::uint64_t seed) {
  AudioSegment seg;
  seg.samples.resize(n);
  RandomStream rng(seed);
  for (auto& s : seg.samples) s = static_cast<float>(2.0 * rng.next_double() - 1.0);
  return seg;
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-22s %10.1f ms %10.1f ms %8.2fx\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s);
}

} // namespace

int main() {
  const int reps = 5;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  // 60 s of audio per transform
  AudioSegment seg = noise(960000, 1);
  Spectrogram spec = stft(seg);

  report("stft (60 s)", time_best_of(reps, [&] { stft_serial(seg); }),
         time_best_of(reps, [&] { stft(seg); }));

  report("istft (60 s)", time_best_of(reps, [&] { istft_serial(spec, seg.samples.size()); }),
         time_best_of(reps, [&] { istft(spec, seg.samples.size()); }));

  report("chromagram (60 s)", time_best_of(reps, [&] { chromagram_serial(seg); }),
         time_best_of(reps, [&] { chromagram(seg); }));

  AudioSegment cd = noise(441000, 2); // 10 s at 44.1 kHz
  report("resample 44.1k->16k", time_best_of(reps, [&] { resample_serial(cd.samples, 44100, 16000); }),
         time_best_of(reps, [&] { resample(cd.samples, 44100, 16000); }));

  // batch chroma scoring: 64 ten-second segments
  std::vector<AudioSegment> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(noise(160000, 100 + static_cast<std::uint64_t>(i)));
  report("chroma batch (64x10s)",
         time_best_of(1, [&] {
           for (const auto& s : batch) chroma_vector(chromagram_serial(s));
         }),
         time_best_of(1, [&] {
           for (const auto& s : batch) chroma_vector(chromagram(s));
         }));
  return 0;
}
