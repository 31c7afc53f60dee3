#ifndef CHROMAMIX_RESAMPLE_HPP
#define CHROMAMIX_RESAMPLE_HPP

#include <span>
#include <vector>

namespace chromamix {

// Kaiser-windowed sinc rate conversion (beta 9.6, 32 zero crossings per
// side, ~96 dB stopband). Output length is round(n * out_rate / in_rate).
// The parallel kernel and the serial reference produce identical bits.
std::vector<float> resample(std::span<const float> input, int in_rate, int out_rate);
std::vector<float> resample_serial(std::span<const float> input, int in_rate, int out_rate);

} // namespace chromamix

#endif
