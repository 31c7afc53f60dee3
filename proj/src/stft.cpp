#include "chromamix/stft.hpp"

#include <algorithm>
#include <cmath>

#include "chromamix/errors.hpp"

namespace chromamix {

namespace {

// Iterative radix-2 FFT with precomputed tables; no forward normalization.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), rev_(n), tw_(n / 2) {
    std::size_t bits = 0;
    while ((1u << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (1u << b)) r |= 1u << (bits - 1 - b);
      rev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      double a = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      tw_[k] = {std::cos(a), std::sin(a)};
    }
  }

  void forward(std::complex<double>* x) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (rev_[i] > i) std::swap(x[i], x[rev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          auto& a = x[start + k];
          auto& b = x[start + k + len / 2];
          std::complex<double> t = b * tw_[k * stride];
          b = a - t;
          a += t;
        }
      }
    }
  }

  void inverse(std::complex<double>* x) const {
    for (std::size_t i = 0; i < n_; ++i) x[i] = std::conj(x[i]);
    forward(x);
    double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = std::conj(x[i]) * inv;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> tw_;
};

// Real-input transform of size N via one complex FFT of size N/2 with the
// standard even/odd packing. Bit-for-bit deterministic like everything else
// here; both the serial and OpenMP paths run this exact code.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), half_(n / 2), fft_(n / 2), tw_(n / 2 + 1) {
    for (std::size_t k = 0; k <= half_; ++k) {
      double a = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      tw_[k] = {std::cos(a), std::sin(a)};
    }
  }

  // in: n reals; out: n/2+1 bins, equal to the unnormalized full FFT.
  void forward(const double* in, std::complex<double>* out,
               std::complex<double>* scratch) const {
    for (std::size_t k = 0; k < half_; ++k) scratch[k] = {in[2 * k], in[2 * k + 1]};
    fft_.forward(scratch);
    out[0] = {scratch[0].real() + scratch[0].imag(), 0.0};
    out[half_] = {scratch[0].real() - scratch[0].imag(), 0.0};
    for (std::size_t k = 1; k < half_; ++k) {
      std::complex<double> a = scratch[k];
      std::complex<double> b = std::conj(scratch[half_ - k]);
      std::complex<double> even = 0.5 * (a + b);
      std::complex<double> odd = std::complex<double>(0.0, -0.5) * (a - b);
      out[k] = even + tw_[k] * odd;
    }
  }

  // in: n/2+1 bins of a real signal's spectrum; out: n reals (normalized).
  void inverse(const std::complex<double>* in, double* out,
               std::complex<double>* scratch) const {
    for (std::size_t k = 0; k < half_; ++k) {
      std::complex<double> xk = in[k];
      std::complex<double> xc = std::conj(in[half_ - k]);
      std::complex<double> even = 0.5 * (xk + xc);
      std::complex<double> odd = std::conj(tw_[k]) * (0.5 * (xk - xc));
      scratch[k] = even + std::complex<double>(0.0, 1.0) * odd;
    }
    fft_.inverse(scratch);
    for (std::size_t k = 0; k < half_; ++k) {
      out[2 * k] = scratch[k].real();
      out[2 * k + 1] = scratch[k].imag();
    }
  }

 private:
  std::size_t n_;
  std::size_t half_;
  Fft fft_;
  std::vector<std::complex<double>> tw_;
};

const RealFft& fft1024() {
  static const RealFft instance(kDftSize);
  return instance;
}

// Reflect (bounce) index without repeating the edge sample.
std::size_t reflect_index(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * n - 2);
  i = ((i % period) + period) % period;
  return static_cast<std::size_t>(i < static_cast<std::int64_t>(n)
                                      ? i
                                      : period - i);
}

std::size_t frame_count(std::size_t n) {
  const std::size_t padded = n + kDftSize; // kDftSize/2 on each side
  return 1 + (padded - kDftSize) / kHop;
}

struct FrameScratch {
  std::vector<double> time = std::vector<double>(kDftSize);
  std::vector<std::complex<double>> fft = std::vector<std::complex<double>>(kDftSize / 2);
};

void transform_frame(const AudioSegment& seg, std::size_t m, const std::vector<double>& window,
                     FrameScratch& scratch, Spectrogram& out) {
  const auto n = seg.samples.size();
  const std::int64_t start = static_cast<std::int64_t>(m * kHop) - kDftSize / 2;
  for (int i = 0; i < kDftSize; ++i)
    scratch.time[static_cast<std::size_t>(i)] =
        seg.samples[reflect_index(start + i, n)] * window[static_cast<std::size_t>(i)];
  fft1024().forward(scratch.time.data(), out.frame(m), scratch.fft.data());
}

template <bool Parallel>
Spectrogram stft_impl(const AudioSegment& segment) {
  if (segment.samples.empty()) raise(ErrorKind::empty_input, "stft of empty segment");
  const auto& window = stft_window();
  Spectrogram out;
  out.sample_rate = segment.sample_rate;
  out.num_frames = frame_count(segment.samples.size());
  out.data.resize(out.num_frames * out.num_bins);

  if constexpr (Parallel) {
#pragma omp parallel
    {
      FrameScratch scratch;
#pragma omp for schedule(static)
      for (std::int64_t m = 0; m < static_cast<std::int64_t>(out.num_frames); ++m)
        transform_frame(segment, static_cast<std::size_t>(m), window, scratch, out);
    }
  } else {
    FrameScratch scratch;
    for (std::size_t m = 0; m < out.num_frames; ++m)
      transform_frame(segment, m, window, scratch, out);
  }
  return out;
}

void check_istft_params(const Spectrogram& spec, std::size_t length) {
  if (spec.dft_size != kDftSize || spec.hop != kHop ||
      spec.num_bins != static_cast<std::size_t>(kDftSize / 2 + 1))
    raise(ErrorKind::parameter, "spectrogram parameters do not match the analysis policy");
  if (spec.num_frames == 0) raise(ErrorKind::parameter, "spectrogram has no frames");
  const std::size_t padded = (spec.num_frames - 1) * kHop + kDftSize;
  if (length + kDftSize / 2 > padded)
    raise(ErrorKind::parameter, "requested length exceeds the synthesizable range");
}

// Rebuild one windowed time-domain frame from its half spectrum.
void synth_frame(const Spectrogram& spec, std::size_t m, const std::vector<double>& window,
                 std::complex<double>* scratch, double* frame_out) {
  const auto* bins = spec.frame(m);
  for (int k = 0; k < kNumBins; ++k) scratch[k] = bins[k];
  for (int k = kNumBins; k < kDftSize; ++k) scratch[k] = std::conj(bins[kDftSize - k]);
  fft1024().inverse(scratch);
  for (int i = 0; i < kDftSize; ++i)
    frame_out[i] = scratch[i].real() * window[static_cast<std::size_t>(i)];
}

template <bool Parallel>
AudioSegment istft_impl(const Spectrogram& spec, std::size_t length) {
  check_istft_params(spec, length);
  const auto& window = stft_window();
  const std::size_t frames = spec.num_frames;
  const std::size_t padded = (frames - 1) * kHop + kDftSize;

  AudioSegment out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(length);

  if constexpr (!Parallel) {
    std::vector<double> acc(padded, 0.0), wsum(padded, 0.0);
    std::vector<std::complex<double>> scratch(kDftSize);
    std::vector<double> frame(kDftSize);
    for (std::size_t m = 0; m < frames; ++m) {
      synth_frame(spec, m, window, scratch.data(), frame.data());
      const std::size_t start = m * kHop;
      for (int i = 0; i < kDftSize; ++i) {
        acc[start + i] += frame[i];
        wsum[start + i] += window[static_cast<std::size_t>(i)] * window[static_cast<std::size_t>(i)];
      }
    }
    for (std::size_t p = 0; p < length; ++p) {
      const std::size_t q = p + kDftSize / 2;
      out.samples[p] = wsum[q] > 1e-10 ? static_cast<float>(acc[q] / wsum[q]) : 0.0f;
    }
    return out;
  }

  // Parallel path: per-frame synthesis, then a gather over output samples.
  // Contributions are accumulated in ascending frame order both here and in
  // the serial loop, so the two paths agree bit-for-bit.
  std::vector<double> frames_time(frames * kDftSize);
#pragma omp parallel
  {
    std::vector<std::complex<double>> scratch(kDftSize);
#pragma omp for schedule(static)
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(frames); ++m)
      synth_frame(spec, static_cast<std::size_t>(m), window, scratch.data(),
                  frames_time.data() + static_cast<std::size_t>(m) * kDftSize);
  }

#pragma omp parallel for schedule(static)
  for (std::int64_t pi = 0; pi < static_cast<std::int64_t>(length); ++pi) {
    const std::size_t q = static_cast<std::size_t>(pi) + kDftSize / 2;
    const std::size_t m_lo = q >= kDftSize - 1 ? (q - (kDftSize - 1) + kHop - 1) / kHop : 0;
    const std::size_t m_hi = std::min(frames - 1, q / kHop);
    double acc = 0.0, wsum = 0.0;
    for (std::size_t m = m_lo; m <= m_hi; ++m) {
      const std::size_t i = q - m * kHop;
      acc += frames_time[m * kDftSize + i];
      wsum += window[i] * window[i];
    }
    out.samples[static_cast<std::size_t>(pi)] =
        wsum > 1e-10 ? static_cast<float>(acc / wsum) : 0.0f;
  }
  return out;
}

} // namespace

const std::vector<double>& stft_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kDftSize);
    for (int i = 0; i < kDftSize; ++i)
      w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / kDftSize);
    return w;
  }();
  return window;
}

Spectrogram stft(const AudioSegment& segment) { return stft_impl<true>(segment); }
Spectrogram stft_serial(const AudioSegment& segment) { return stft_impl<false>(segment); }

AudioSegment istft(const Spectrogram& spec, std::size_t length) {
  return istft_impl<true>(spec, length);
}
AudioSegment istft_serial(const Spectrogram& spec, std::size_t length) {
  return istft_impl<false>(spec, length);
}

RealMatrix magnitude(const Spectrogram& spec) {
  RealMatrix m;
  m.rows = spec.num_frames;
  m.cols = spec.num_bins;
  m.data.resize(spec.data.size());
  for (std::size_t i = 0; i < spec.data.size(); ++i) m.data[i] = std::abs(spec.data[i]);
  return m;
}

} // namespace chromamix
