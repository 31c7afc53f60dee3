#include "chromamix/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "chromamix/errors.hpp"

namespace chromamix {

namespace {

constexpr int kZeroCrossings = 32;
constexpr double kKaiserBeta = 9.6;
constexpr double kRolloff = 0.945;

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  double half = x * 0.5;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  double px = M_PI * x;
  return std::sin(px) / px;
}

struct KernelSpec {
  double cutoff;     // cycles per input sample, already rolled off
  double half_width; // taps per side in input samples
  double i0_beta;
};

KernelSpec make_kernel(int in_rate, int out_rate) {
  double ratio = static_cast<double>(out_rate) / in_rate;
  double cutoff = kRolloff * 0.5 * std::min(1.0, ratio);
  return {cutoff, kZeroCrossings / (2.0 * cutoff), bessel_i0(kKaiserBeta)};
}

double kernel_value(const KernelSpec& spec, double u) {
  double v = u / spec.half_width;
  if (v <= -1.0 || v >= 1.0) return 0.0;
  double kaiser = bessel_i0(kKaiserBeta * std::sqrt(1.0 - v * v)) / spec.i0_beta;
  return 2.0 * spec.cutoff * sinc(2.0 * spec.cutoff * u) * kaiser;
}

float convolve_at(std::span<const float> input, const KernelSpec& spec, double t) {
  auto lo = static_cast<std::int64_t>(std::ceil(t - spec.half_width));
  auto hi = static_cast<std::int64_t>(std::floor(t + spec.half_width));
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(input.size()) - 1);
  double acc = 0.0;
  for (std::int64_t n = lo; n <= hi; ++n)
    acc += input[static_cast<std::size_t>(n)] * kernel_value(spec, t - static_cast<double>(n));
  return static_cast<float>(acc);
}

template <bool Parallel>
std::vector<float> resample_impl(std::span<const float> input, int in_rate, int out_rate) {
  if (in_rate <= 0 || out_rate <= 0) raise(ErrorKind::parameter, "sample rates must be positive");
  if (in_rate == out_rate) return {input.begin(), input.end()};
  if (input.empty()) return {};

  auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(input.size()) * out_rate / in_rate));
  std::vector<float> out(out_len);
  const KernelSpec spec = make_kernel(in_rate, out_rate);
  const double step = static_cast<double>(in_rate) / out_rate;

  if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(out_len); ++i)
      out[static_cast<std::size_t>(i)] = convolve_at(input, spec, static_cast<double>(i) * step);
  } else {
    for (std::size_t i = 0; i < out_len; ++i)
      out[i] = convolve_at(input, spec, static_cast<double>(i) * step);
  }
  return out;
}

} // namespace

std::vector<float> resample(std::span<const float> input, int in_rate, int out_rate) {
  return resample_impl<true>(input, in_rate, out_rate);
}

std::vector<float> resample_serial(std::span<const float> input, int in_rate, int out_rate) {
  return resample_impl<false>(input, in_rate, out_rate);
}

} // namespace chromamix
