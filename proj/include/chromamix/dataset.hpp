#ifndef CHROMAMIX_DATASET_HPP
#define CHROMAMIX_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "chromamix/audio.hpp"
#include "chromamix/rng.hpp"

namespace chromamix {

enum class ManifestKind { labeled, unlabeled, pseudo_labeled };

const char* manifest_kind_name(ManifestKind kind);
ManifestKind parse_manifest_kind(const std::string& name);

struct ManifestEntry {
  std::string song_id;
  std::string vocal;         // paths as written in the manifest; may be
  std::string accompaniment; // relative to the manifest's directory
  std::string mixture;
  double duration_s = 0.0;
  std::string provenance;

  bool has_stems() const { return !vocal.empty() && !accompaniment.empty(); }
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string dataset_name;
  ManifestKind kind = ManifestKind::labeled;
  std::filesystem::path base_dir; // resolution root for relative entry paths

  std::filesystem::path resolve(const std::string& p) const;
  const ManifestEntry* find(const std::string& song_id) const;
};

// JSON-lines manifest: a version header line followed by one entry object
// per line. An empty file parses as an empty manifest. Referenced files
// are probed for existence and duration.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Both stems of one song at 16 kHz, the shorter padded with trailing
// zeros so lengths match.
struct LoadedStems {
  std::string song_id;
  AudioSegment vocal;
  AudioSegment accompaniment;

  std::size_t num_samples() const { return vocal.samples.size(); }
};

LoadedStems load_stems(const Manifest& manifest, const ManifestEntry& entry);

// Uniformly random eligible song, uniformly random start offset quantized
// to whole samples.
AudioSegment random_segment(const Manifest& manifest, StemRole stem, double duration_s,
                            RandomStream& rng);

// ---- synthetic corpus ------------------------------------------------

struct SynthSongSpec {
  std::string song_id;
  int key = 0; // pitch class 0..11 (0 = C)
  double duration_s = 30.0;
  std::string melody = "steps"; // steps | arc | arp | drone | sparse
  std::string chords = "I-IV-V-I";
  double tempo_bpm = 120.0;
};

struct CorpusSpec {
  std::string name = "synthetic";
  std::vector<SynthSongSpec> songs;
};

CorpusSpec load_corpus_spec(const std::filesystem::path& path);
int parse_key(const std::string& key); // "C", "F#", "Bb" or "0".."11"

// Renders deterministic stem WAVs (stacked-sine melodies and chords with
// note envelopes) plus a manifest into out_dir. Same spec and seed give
// identical bytes.
Manifest synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                      RandomStream& rng);

// In-memory stem cache so batch jobs do not re-read WAVs per draw.
// Preloads every entry; treat as read-only afterwards (safe to share
// across threads).
class StemCache {
 public:
  explicit StemCache(const Manifest& manifest);
  const LoadedStems& get(const std::string& song_id) const;
  const Manifest& manifest() const { return *manifest_; }

 private:
  const Manifest* manifest_;
  std::vector<LoadedStems> stems_;
};

} // namespace chromamix

#endif
