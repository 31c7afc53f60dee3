#ifndef CHROMAMIX_TEST_SUPPORT_HPP
#define CHROMAMIX_TEST_SUPPORT_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <span>
#include <string>

#include <unistd.h>

#include "chromamix/audio.hpp"
#include "chromamix/rng.hpp"

namespace chromamix::test {

inline AudioSegment make_tone(double freq, double duration_s, double amp = 1.0,
                              int sample_rate = kSampleRate, double phase = 0.0) {
  AudioSegment seg;
  seg.sample_rate = sample_rate;
  auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  seg.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    seg.samples[i] =
        static_cast<float>(amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / sample_rate + phase));
  return seg;
}

inline AudioSegment make_noise(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  AudioSegment seg;
  seg.samples.resize(n);
  RandomStream rng(seed);
  for (auto& s : seg.samples)
    s = static_cast<float>(amp * (2.0 * rng.next_double() - 1.0));
  return seg;
}

// Direct DFT magnitude at one bin; independent of the library FFT.
inline double direct_dft_mag(std::span<const float> x, std::size_t bin) {
  double re = 0.0, im = 0.0;
  const double w = -2.0 * M_PI * static_cast<double>(bin) / static_cast<double>(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    re += x[n] * std::cos(w * static_cast<double>(n));
    im += x[n] * std::sin(w * static_cast<double>(n));
  }
  return std::hypot(re, im);
}

// Unique temp directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("chromamix-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

} // namespace chromamix::test

#endif
