#include "chromamix/wav.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "chromamix/errors.hpp"
#include "chromamix/resample.hpp"

namespace chromamix {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  std::array<unsigned char, 2> b{};
  in.read(reinterpret_cast<char*>(b.data()), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

// Walks RIFF chunks until "data"; fills fmt on the way. Returns the data
// payload size and leaves the stream positioned at the payload.
std::size_t scan_to_data(std::istream& in, const std::filesystem::path& path, FmtChunk& fmt) {
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    raise(ErrorKind::format, path.string() + ": not a RIFF file");
  read_u32(in); // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    raise(ErrorKind::format, path.string() + ": not a WAVE file");

  bool have_fmt = false;
  while (in.read(tag, 4)) {
    std::uint32_t size = read_u32(in);
    if (!in) break;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) raise(ErrorKind::format, path.string() + ": malformed fmt chunk");
      fmt.format = read_u16(in);
      fmt.channels = read_u16(in);
      fmt.sample_rate = read_u32(in);
      read_u32(in); // byte rate
      read_u16(in); // block align
      fmt.bits = read_u16(in);
      std::uint32_t consumed = 16;
      if (fmt.format == kFormatExtensible && size >= 26) {
        std::uint16_t cb = read_u16(in);
        consumed += 2;
        if (cb >= 8) {
          read_u16(in);            // valid bits
          read_u32(in);            // channel mask
          fmt.format = read_u16(in); // first word of the sub-format GUID
          consumed += 8;
        }
      }
      in.ignore(size - consumed + (size & 1));
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) raise(ErrorKind::format, path.string() + ": data chunk before fmt");
      return size;
    } else {
      in.ignore(static_cast<std::streamsize>(size) + (size & 1));
    }
  }
  raise(ErrorKind::format, path.string() + ": no data chunk");
}

std::size_t bytes_per_sample(const FmtChunk& fmt, const std::filesystem::path& path) {
  if (fmt.format == kFormatFloat) {
    if (fmt.bits != 32) raise(ErrorKind::format, path.string() + ": only 32-bit float supported");
    return 4;
  }
  if (fmt.format == kFormatPcm) {
    if (fmt.bits != 16 && fmt.bits != 24 && fmt.bits != 32)
      raise(ErrorKind::format,
            path.string() + ": unsupported PCM depth " + std::to_string(fmt.bits));
    return fmt.bits / 8;
  }
  raise(ErrorKind::format, path.string() + ": unsupported encoding " + std::to_string(fmt.format));
}

float decode_sample(const unsigned char* p, const FmtChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  switch (fmt.bits) {
    case 16: {
      auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return static_cast<float>(v) / 32768.0f;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return static_cast<float>(v) / 8388608.0f;
    }
    default: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return static_cast<float>(static_cast<double>(v) / 2147483648.0);
    }
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v), static_cast<char>(v >> 8),
                              static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b.data(), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v), static_cast<char>(v >> 8)};
  out.write(b.data(), 2);
}

} // namespace

WavInfo wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open " + path.string());
  FmtChunk fmt;
  std::size_t data_size = scan_to_data(in, path, fmt);
  if (fmt.channels == 0) raise(ErrorKind::format, path.string() + ": zero channels");
  std::size_t frame_bytes = bytes_per_sample(fmt, path) * fmt.channels;
  WavInfo info;
  info.sample_rate = static_cast<int>(fmt.sample_rate);
  info.channels = fmt.channels;
  info.frames = data_size / frame_bytes;
  return info;
}

AudioSegment load_wav(const std::filesystem::path& path, int target_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open " + path.string());
  FmtChunk fmt;
  std::size_t data_size = scan_to_data(in, path, fmt);
  if (fmt.channels == 0) raise(ErrorKind::format, path.string() + ": zero channels");
  if (fmt.sample_rate == 0) raise(ErrorKind::format, path.string() + ": zero sample rate");

  std::size_t bps = bytes_per_sample(fmt, path);
  std::size_t frame_bytes = bps * fmt.channels;
  std::size_t frames = data_size / frame_bytes;
  if (frames == 0) raise(ErrorKind::empty_input, path.string() + ": zero-length audio");

  std::vector<unsigned char> raw(frames * frame_bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) raise(ErrorKind::io, path.string() + ": truncated data chunk");

  // Downmix by channel mean, accumulated in double.
  std::vector<float> mono(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    const unsigned char* p = raw.data() + f * frame_bytes;
    for (unsigned c = 0; c < fmt.channels; ++c) acc += decode_sample(p + c * bps, fmt);
    mono[f] = static_cast<float>(acc / fmt.channels);
  }

  AudioSegment out;
  out.sample_rate = target_rate;
  out.song_id = path.stem().string();
  if (static_cast<int>(fmt.sample_rate) == target_rate) {
    out.samples = std::move(mono);
  } else {
    out.samples = resample(mono, static_cast<int>(fmt.sample_rate), target_rate);
  }
  if (out.samples.empty()) raise(ErrorKind::empty_input, path.string() + ": zero-length audio");
  return out;
}

void save_wav(const AudioSegment& segment, const std::filesystem::path& path) {
  if (segment.samples.empty()) raise(ErrorKind::empty_input, "refusing to write empty segment");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write " + path.string());

  const auto n = static_cast<std::uint32_t>(segment.samples.size());
  const std::uint32_t data_bytes = n * 4;
  const auto rate = static_cast<std::uint32_t>(segment.sample_rate);
  // fmt (18 bytes, format 3) + fact + data
  write_u32(out, 0x46464952);              // "RIFF"
  write_u32(out, 4 + 26 + 12 + 8 + data_bytes);
  write_u32(out, 0x45564157);              // "WAVE"
  write_u32(out, 0x20746D66);              // "fmt "
  write_u32(out, 18);
  write_u16(out, kFormatFloat);
  write_u16(out, 1);
  write_u32(out, rate);
  write_u32(out, rate * 4);
  write_u16(out, 4);
  write_u16(out, 32);
  write_u16(out, 0);                       // cbSize
  write_u32(out, 0x74636166);              // "fact"
  write_u32(out, 4);
  write_u32(out, n);
  write_u32(out, 0x61746164);              // "data"
  write_u32(out, data_bytes);
  out.write(reinterpret_cast<const char*>(segment.samples.data()), data_bytes);
  if (!out) raise(ErrorKind::io, "write failed: " + path.string());
}

} // namespace chromamix
