#ifndef CHROMAMIX_REMIX_HPP
#define CHROMAMIX_REMIX_HPP

#include <optional>
#include <string>
#include <vector>

#include "chromamix/audio.hpp"
#include "chromamix/dataset.hpp"
#include "chromamix/matching.hpp"
#include "chromamix/rng.hpp"

namespace chromamix {

enum class RemixStrategy { pitch_aware, random, mix_audio };

const char* remix_strategy_name(RemixStrategy s);
RemixStrategy parse_remix_strategy(const std::string& name);

struct SegmentRef {
  std::string song_id;
  double offset_s = 0.0;
};

// One anchor or candidate: both stems of the same window.
struct StemSegments {
  AudioSegment vocal;
  AudioSegment accompaniment;

  SegmentRef ref() const { return {vocal.song_id, vocal.offset_s}; }
};

struct RemixRecord {
  AudioSegment mixture; // always exactly vocal + accompaniment
  AudioSegment vocal;
  AudioSegment accompaniment;
  SegmentRef vocal_source;
  SegmentRef accompaniment_source;
  RemixStrategy strategy = RemixStrategy::pitch_aware;
  std::optional<double> match_score;  // present iff strategy == pitch_aware
  std::optional<double> temperature;  // present iff strategy == pitch_aware
  std::vector<ScoredCandidate> scored;
};

// Yields random candidate windows with both stems.
class SegmentSource {
 public:
  virtual ~SegmentSource() = default;
  virtual StemSegments draw(RandomStream& rng) = 0;
  virtual std::size_t num_songs() const = 0;
};

// Draws uniformly over eligible songs of a cached manifest, then uniformly
// over whole-sample window starts. An excluded song id keeps anchors from
// partnering with themselves.
class ManifestSegmentSource : public SegmentSource {
 public:
  ManifestSegmentSource(const StemCache& cache, double segment_s,
                        std::string exclude_song_id = "");
  StemSegments draw(RandomStream& rng) override;
  std::size_t num_songs() const override { return eligible_.size(); }

 private:
  const StemCache* cache_;
  std::size_t segment_samples_;
  std::vector<const LoadedStems*> eligible_;
};

// Anchor vocal plus the accompaniment of a partner sampled by chroma
// similarity at config.temperature.
RemixRecord remix_pitch_aware(const StemSegments& anchor, SegmentSource& pool,
                              const MatchConfig& config, RandomStream& rng);

// Uniform partner choice over the same n-candidate draw protocol; with a
// shared seed this makes choices identical to pitch-aware at T = infinity.
RemixRecord remix_random(const StemSegments& anchor, SegmentSource& pool, int n_candidates,
                         RandomStream& rng);

// Vocal and accompaniment windows drawn from the same song with
// non-overlapping starts.
RemixRecord remix_mix_audio(const LoadedStems& song, RandomStream& rng, double segment_s);

// Deterministic window form of mix-audio used by the sampler above.
RemixRecord mix_audio_windows(const LoadedStems& song, std::size_t start1, std::size_t start2,
                              std::size_t segment_samples);

} // namespace chromamix

#endif
