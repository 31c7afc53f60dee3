#include "chromamix/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>

#include <json.hpp>

#include "chromamix/errors.hpp"
#include "chromamix/wav.hpp"

namespace chromamix {

using nlohmann::json;

const char* manifest_kind_name(ManifestKind kind) {
  switch (kind) {
    case ManifestKind::labeled: return "labeled";
    case ManifestKind::unlabeled: return "unlabeled";
    case ManifestKind::pseudo_labeled: return "pseudo_labeled";
  }
  return "?";
}

ManifestKind parse_manifest_kind(const std::string& name) {
  if (name == "labeled") return ManifestKind::labeled;
  if (name == "unlabeled") return ManifestKind::unlabeled;
  if (name == "pseudo_labeled") return ManifestKind::pseudo_labeled;
  raise(ErrorKind::validation, "unknown manifest kind: " + name);
}

std::filesystem::path Manifest::resolve(const std::string& p) const {
  std::filesystem::path fp(p);
  if (fp.is_absolute() || base_dir.empty()) return fp;
  return base_dir / fp;
}

const ManifestEntry* Manifest::find(const std::string& song_id) const {
  for (const auto& e : entries)
    if (e.song_id == song_id) return &e;
  return nullptr;
}

namespace {

constexpr const char* kManifestFormat = "chromamix-manifest";
constexpr int kManifestVersion = 1;

void probe_path(const Manifest& m, const std::string& rel, const std::string& song_id,
                double& duration) {
  auto path = m.resolve(rel);
  if (!std::filesystem::exists(path))
    raise(ErrorKind::validation,
          "manifest entry '" + song_id + "' references missing file: " + path.string());
  WavInfo info = wav_info(path);
  duration = std::max(duration, info.duration_s());
}

} // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::io, "cannot open manifest: " + path.string());

  Manifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorKind::validation,
            path.string() + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (!have_header) {
      if (!j.contains("format") || j["format"] != kManifestFormat)
        raise(ErrorKind::validation, path.string() + ": first line must be a " +
                                         std::string(kManifestFormat) + " header");
      if (j.value("version", 0) != kManifestVersion)
        raise(ErrorKind::validation, path.string() + ": unsupported manifest version");
      m.dataset_name = j.value("name", "");
      m.kind = parse_manifest_kind(j.value("kind", "labeled"));
      have_header = true;
      continue;
    }
    ManifestEntry e;
    e.song_id = j.value("song_id", "");
    if (e.song_id.empty())
      raise(ErrorKind::validation,
            path.string() + ":" + std::to_string(lineno) + ": entry without song_id");
    e.vocal = j.value("vocal", "");
    e.accompaniment = j.value("accompaniment", "");
    e.mixture = j.value("mixture", "");
    e.duration_s = j.value("duration_s", 0.0);
    e.provenance = j.value("provenance", "");
    m.entries.push_back(std::move(e));
  }

  std::set<std::string> seen;
  for (auto& e : m.entries) {
    if (!seen.insert(e.song_id).second)
      raise(ErrorKind::validation, path.string() + ": duplicate song_id '" + e.song_id + "'");
    double probed = 0.0;
    if (!e.vocal.empty()) probe_path(m, e.vocal, e.song_id, probed);
    if (!e.accompaniment.empty()) probe_path(m, e.accompaniment, e.song_id, probed);
    if (!e.mixture.empty()) probe_path(m, e.mixture, e.song_id, probed);
    if (e.vocal.empty() && e.accompaniment.empty() && e.mixture.empty())
      raise(ErrorKind::validation,
            path.string() + ": entry '" + e.song_id + "' references no audio");
    if (e.duration_s <= 0.0) e.duration_s = probed;
  }
  return m;
}

namespace {

// Entry paths are stored relative to the manifest file, so rewrite them
// for the destination directory; paths that would escape upward stay
// absolute.
std::string rebase_path(const Manifest& m, const std::string& p,
                        const std::filesystem::path& dest_dir) {
  if (p.empty()) return p;
  auto abs = std::filesystem::absolute(m.resolve(p)).lexically_normal();
  auto rel = abs.lexically_relative(std::filesystem::absolute(dest_dir).lexically_normal());
  if (rel.empty() || rel.native().starts_with("..")) return abs.string();
  return rel.string();
}

} // namespace

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write manifest: " + path.string());
  const auto dest_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  json header{{"format", kManifestFormat},
              {"version", kManifestVersion},
              {"name", manifest.dataset_name},
              {"kind", manifest_kind_name(manifest.kind)}};
  out << header.dump() << '\n';
  for (const auto& e : manifest.entries) {
    json j{{"song_id", e.song_id}, {"duration_s", e.duration_s}};
    if (!e.vocal.empty()) j["vocal"] = rebase_path(manifest, e.vocal, dest_dir);
    if (!e.accompaniment.empty())
      j["accompaniment"] = rebase_path(manifest, e.accompaniment, dest_dir);
    if (!e.mixture.empty()) j["mixture"] = rebase_path(manifest, e.mixture, dest_dir);
    if (!e.provenance.empty()) j["provenance"] = e.provenance;
    out << j.dump() << '\n';
  }
  if (!out) raise(ErrorKind::io, "write failed: " + path.string());
}

LoadedStems load_stems(const Manifest& manifest, const ManifestEntry& entry) {
  if (!entry.has_stems())
    raise(ErrorKind::validation, "entry '" + entry.song_id + "' has no stem pair");
  LoadedStems s;
  s.song_id = entry.song_id;
  s.vocal = load_wav(manifest.resolve(entry.vocal));
  s.accompaniment = load_wav(manifest.resolve(entry.accompaniment));
  s.vocal.song_id = entry.song_id;
  s.accompaniment.song_id = entry.song_id;
  s.vocal.stem = StemRole::vocal;
  s.accompaniment.stem = StemRole::accompaniment;
  // Pad the shorter stem with trailing zeros; truncation would drop audio.
  std::size_t n = std::max(s.vocal.samples.size(), s.accompaniment.samples.size());
  s.vocal.samples.resize(n, 0.0f);
  s.accompaniment.samples.resize(n, 0.0f);
  return s;
}

AudioSegment random_segment(const Manifest& manifest, StemRole stem, double duration_s,
                            RandomStream& rng) {
  const auto seg_samples = static_cast<std::size_t>(std::llround(duration_s * kSampleRate));
  if (seg_samples == 0) raise(ErrorKind::parameter, "requested zero-length segment");

  std::vector<const ManifestEntry*> eligible;
  for (const auto& e : manifest.entries) {
    const std::string* p = nullptr;
    switch (stem) {
      case StemRole::vocal: p = &e.vocal; break;
      case StemRole::accompaniment: p = &e.accompaniment; break;
      case StemRole::mixture: p = &e.mixture; break;
    }
    if (p->empty()) continue;
    auto n16 = static_cast<std::size_t>(std::llround(e.duration_s * kSampleRate));
    if (n16 >= seg_samples) eligible.push_back(&e);
  }
  if (eligible.empty())
    raise(ErrorKind::insufficient, "no song long enough for a " + std::to_string(duration_s) +
                                       " s " + stem_role_name(stem) + " segment");

  const auto* entry = eligible[rng.uniform_index(eligible.size())];
  const std::string& rel = stem == StemRole::vocal           ? entry->vocal
                           : stem == StemRole::accompaniment ? entry->accompaniment
                                                             : entry->mixture;
  AudioSegment song = load_wav(manifest.resolve(rel));
  if (song.samples.size() < seg_samples)
    raise(ErrorKind::insufficient, "song '" + entry->song_id + "' shorter than declared");
  std::size_t max_start = song.samples.size() - seg_samples;
  auto start = static_cast<std::size_t>(rng.uniform_index(max_start + 1));

  AudioSegment out;
  out.samples.assign(song.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     song.samples.begin() + static_cast<std::ptrdiff_t>(start + seg_samples));
  out.song_id = entry->song_id;
  out.stem = stem;
  out.offset_s = static_cast<double>(start) / kSampleRate;
  return out;
}

// ---- synthetic corpus --------------------------------------------------

namespace {

constexpr int kMajorScale[7] = {0, 2, 4, 5, 7, 9, 11};

struct Chord {
  int root_degree; // semitone offset of the root within the key
  bool minor;
};

Chord parse_chord(const std::string& token) {
  static const std::map<std::string, Chord> chords = {
      {"I", {0, false}},  {"ii", {2, true}},  {"iii", {4, true}}, {"IV", {5, false}},
      {"V", {7, false}},  {"vi", {9, true}},
  };
  auto it = chords.find(token);
  if (it == chords.end()) raise(ErrorKind::validation, "unknown chord symbol: " + token);
  return it->second;
}

std::vector<Chord> parse_chord_pattern(const std::string& pattern) {
  std::vector<Chord> out;
  std::stringstream ss(pattern);
  std::string token;
  while (std::getline(ss, token, '-'))
    if (!token.empty()) out.push_back(parse_chord(token));
  if (out.empty()) raise(ErrorKind::validation, "empty chord pattern");
  return out;
}

std::vector<int> melody_degrees(const std::string& name) {
  if (name == "steps") return {0, 2, 4, 5, 4, 2, 1, 0};
  if (name == "arc") return {0, 1, 2, 3, 4, 3, 2, 1};
  if (name == "arp") return {0, 2, 4, 7, 4, 2};
  if (name == "drone") return {0};
  if (name == "sparse") return {0, -1, -1, -1, 4, -1, -1, -1}; // -1 = rest
  raise(ErrorKind::validation, "unknown melody pattern: " + name);
}

double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

// Adds a stacked-sine note (fundamental + 2 partials) with raised-cosine
// fades into out[start, start+len).
void add_note(std::vector<float>& out, std::size_t start, std::size_t len, int midi, double amp,
              std::span<const double> partials, RandomStream& rng) {
  const double f0 = midi_to_hz(midi);
  const auto fade = std::min<std::size_t>(len / 4, static_cast<std::size_t>(0.010 * kSampleRate));
  std::vector<double> phases(partials.size());
  for (auto& p : phases) p = rng.next_double() * 2.0 * M_PI;

  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    double t = static_cast<double>(i) / kSampleRate;
    double v = 0.0;
    for (std::size_t h = 0; h < partials.size(); ++h)
      v += partials[h] * std::sin(2.0 * M_PI * f0 * (h + 1) * t + phases[h]);
    double env = 1.0;
    if (fade > 0) {
      if (i < fade) env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / fade);
      else if (len - 1 - i < fade)
        env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(len - 1 - i) / fade);
    }
    out[start + i] += static_cast<float>(amp * env * v);
  }
}

std::vector<float> render_accompaniment(const SynthSongSpec& song, RandomStream& rng) {
  const auto n = static_cast<std::size_t>(std::llround(song.duration_s * kSampleRate));
  std::vector<float> out(n, 0.0f);
  const auto chords = parse_chord_pattern(song.chords);
  const double beat_s = 60.0 / song.tempo_bpm;
  const double bar_s = 4.0 * beat_s;
  const auto bar_len = static_cast<std::size_t>(std::llround(bar_s * kSampleRate));
  const double partials[3] = {1.0, 0.5, 0.2};
  // Root-heavy voicing keeps the key's pitch class dominant in the folded
  // chroma; equal weights would leave root and fifth nearly tied.
  const double tone_amp[3] = {1.5, 0.8, 0.9};

  std::size_t bar = 0;
  for (std::size_t start = 0; start < n; start += bar_len, ++bar) {
    const Chord& chord = chords[bar % chords.size()];
    const std::size_t len = std::min(bar_len, n - start);
    const int intervals[3] = {0, chord.minor ? 3 : 4, 7};
    for (int t = 0; t < 3; ++t) {
      int midi = 60 + (song.key + chord.root_degree + intervals[t]) % 12;
      add_note(out, start, len, midi, 0.09 * tone_amp[t], partials, rng);
    }
  }
  return out;
}

std::vector<float> render_vocal(const SynthSongSpec& song, RandomStream& rng) {
  const auto n = static_cast<std::size_t>(std::llround(song.duration_s * kSampleRate));
  std::vector<float> out(n, 0.0f);
  const auto degrees = melody_degrees(song.melody);
  const double beat_s = 60.0 / song.tempo_bpm;
  const auto beat_len = static_cast<std::size_t>(std::llround(beat_s * kSampleRate));
  const double partials[3] = {1.0, 0.4, 0.2};

  std::size_t beat = 0;
  for (std::size_t start = 0; start < n; start += beat_len, ++beat) {
    int degree = degrees[beat % degrees.size()];
    if (degree < 0) continue; // rest
    int midi = 72 + song.key + kMajorScale[degree % 7] + 12 * (degree / 7);
    add_note(out, start, std::min(beat_len, n - start), midi, 0.3, partials, rng);
  }
  return out;
}

} // namespace

int parse_key(const std::string& key) {
  static const std::map<std::string, int> names = {
      {"C", 0},  {"C#", 1}, {"Db", 1}, {"D", 2},  {"D#", 3}, {"Eb", 3}, {"E", 4},  {"F", 5},
      {"F#", 6}, {"Gb", 6}, {"G", 7},  {"G#", 8}, {"Ab", 8}, {"A", 9},  {"A#", 10}, {"Bb", 10},
      {"B", 11},
  };
  auto it = names.find(key);
  if (it != names.end()) return it->second;
  try {
    int v = std::stoi(key);
    if (v >= 0 && v < 12) return v;
  } catch (...) {
  }
  raise(ErrorKind::validation, "unknown key: " + key);
}

CorpusSpec load_corpus_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::io, "cannot open corpus spec: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorKind::validation, path.string() + ": bad JSON: " + e.what());
  }
  CorpusSpec spec;
  spec.name = j.value("name", "synthetic");
  for (const auto& js : j.value("songs", json::array())) {
    SynthSongSpec s;
    s.song_id = js.value("song_id", "");
    if (s.song_id.empty()) raise(ErrorKind::validation, "corpus song without song_id");
    if (js.contains("key")) {
      if (js["key"].is_number_integer()) s.key = js["key"].get<int>();
      else s.key = parse_key(js["key"].get<std::string>());
    }
    if (s.key < 0 || s.key > 11) raise(ErrorKind::validation, "key out of range");
    s.duration_s = js.value("duration_s", 30.0);
    s.melody = js.value("melody", "steps");
    s.chords = js.value("chords", "I-IV-V-I");
    s.tempo_bpm = js.value("tempo_bpm", 120.0);
    spec.songs.push_back(std::move(s));
  }
  return spec;
}

Manifest synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                      RandomStream& rng) {
  Manifest manifest;
  manifest.dataset_name = spec.name;
  manifest.kind = ManifestKind::labeled;
  manifest.base_dir = out_dir;
  if (spec.songs.empty()) return manifest;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  for (std::size_t i = 0; i < spec.songs.size(); ++i) {
    const auto& song = spec.songs[i];
    RandomStream voc_rng = rng.derive(2 * i);
    RandomStream acc_rng = rng.derive(2 * i + 1);

    AudioSegment vocal;
    vocal.samples = render_vocal(song, voc_rng);
    vocal.song_id = song.song_id;
    vocal.stem = StemRole::vocal;

    AudioSegment acc;
    acc.samples = render_accompaniment(song, acc_rng);
    acc.song_id = song.song_id;
    acc.stem = StemRole::accompaniment;

    AudioSegment mixture;
    mixture.samples.resize(vocal.samples.size());
    for (std::size_t k = 0; k < mixture.samples.size(); ++k)
      mixture.samples[k] = vocal.samples[k] + acc.samples[k];
    mixture.song_id = song.song_id;
    mixture.stem = StemRole::mixture;

    save_wav(vocal, out_dir / (song.song_id + "_vocal.wav"));
    save_wav(acc, out_dir / (song.song_id + "_accompaniment.wav"));
    save_wav(mixture, out_dir / (song.song_id + "_mixture.wav"));

    ManifestEntry e;
    e.song_id = song.song_id;
    e.vocal = song.song_id + "_vocal.wav";
    e.accompaniment = song.song_id + "_accompaniment.wav";
    e.mixture = song.song_id + "_mixture.wav";
    e.duration_s = song.duration_s;
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

StemCache::StemCache(const Manifest& manifest) : manifest_(&manifest) {
  stems_.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) stems_.push_back(load_stems(manifest, e));
}

const LoadedStems& StemCache::get(const std::string& song_id) const {
  for (const auto& s : stems_)
    if (s.song_id == song_id) return s;
  raise(ErrorKind::validation, "song not in cache: " + song_id);
}

} // namespace chromamix
