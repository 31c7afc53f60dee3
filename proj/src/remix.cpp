#include "chromamix/remix.hpp"

#include <algorithm>
#include <cmath>

#include "chromamix/errors.hpp"

namespace chromamix {

const char* remix_strategy_name(RemixStrategy s) {
  switch (s) {
    case RemixStrategy::pitch_aware: return "pitch_aware";
    case RemixStrategy::random: return "random";
    case RemixStrategy::mix_audio: return "mix_audio";
  }
  return "?";
}

RemixStrategy parse_remix_strategy(const std::string& name) {
  if (name == "pitch_aware") return RemixStrategy::pitch_aware;
  if (name == "random") return RemixStrategy::random;
  if (name == "mix_audio") return RemixStrategy::mix_audio;
  raise(ErrorKind::usage, "unknown remix strategy: " + name);
}

namespace {

AudioSegment sum_segments(const AudioSegment& vocal, const AudioSegment& accompaniment) {
  if (vocal.samples.size() != accompaniment.samples.size())
    raise(ErrorKind::shape, "stem lengths differ: " + std::to_string(vocal.samples.size()) +
                                " vs " + std::to_string(accompaniment.samples.size()));
  AudioSegment mix;
  mix.samples.resize(vocal.samples.size());
  for (std::size_t i = 0; i < mix.samples.size(); ++i)
    mix.samples[i] = vocal.samples[i] + accompaniment.samples[i];
  mix.stem = StemRole::mixture;
  mix.song_id = vocal.song_id;
  mix.offset_s = vocal.offset_s;
  return mix;
}

AudioSegment window_of(const AudioSegment& stem, std::size_t start, std::size_t len) {
  AudioSegment out;
  out.samples.assign(stem.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     stem.samples.begin() + static_cast<std::ptrdiff_t>(start + len));
  out.song_id = stem.song_id;
  out.stem = stem.stem;
  out.offset_s = static_cast<double>(start) / kSampleRate;
  return out;
}

} // namespace

ManifestSegmentSource::ManifestSegmentSource(const StemCache& cache, double segment_s,
                                             std::string exclude_song_id)
    : cache_(&cache),
      segment_samples_(static_cast<std::size_t>(std::llround(segment_s * kSampleRate))) {
  const auto& manifest = cache.manifest();
  for (const auto& e : manifest.entries) {
    if (e.song_id == exclude_song_id) continue;
    if (!e.has_stems()) continue;
    if (cache.get(e.song_id).num_samples() >= segment_samples_)
      eligible_.push_back(&cache.get(e.song_id));
  }
}

StemSegments ManifestSegmentSource::draw(RandomStream& rng) {
  if (eligible_.empty())
    raise(ErrorKind::insufficient, "candidate pool has no song long enough");
  const LoadedStems* song = eligible_[rng.uniform_index(eligible_.size())];
  std::size_t max_start = song->num_samples() - segment_samples_;
  auto start = static_cast<std::size_t>(rng.uniform_index(max_start + 1));
  return {window_of(song->vocal, start, segment_samples_),
          window_of(song->accompaniment, start, segment_samples_)};
}

RemixRecord remix_pitch_aware(const StemSegments& anchor, SegmentSource& pool,
                              const MatchConfig& config, RandomStream& rng) {
  if (config.n_candidates < 1) raise(ErrorKind::parameter, "n_candidates must be >= 1");
  if (pool.num_songs() == 0)
    raise(ErrorKind::insufficient, "candidate pool is empty");

  std::vector<StemSegments> candidates;
  candidates.reserve(static_cast<std::size_t>(config.n_candidates));
  for (int i = 0; i < config.n_candidates; ++i) candidates.push_back(pool.draw(rng));

  std::vector<AudioSegment> match_stems;
  match_stems.reserve(candidates.size());
  for (const auto& c : candidates)
    match_stems.push_back(config.mode == MatchMode::voc2voc ? c.vocal : c.accompaniment);
  const AudioSegment& anchor_stem =
      config.mode == MatchMode::voc2voc ? anchor.vocal : anchor.accompaniment;

  SampleResult sampled = sample_partner(anchor_stem, match_stems, config, rng);
  const StemSegments& partner = candidates[sampled.chosen];

  RemixRecord rec;
  rec.strategy = RemixStrategy::pitch_aware;
  rec.vocal = anchor.vocal;
  rec.accompaniment = partner.accompaniment;
  rec.mixture = sum_segments(rec.vocal, rec.accompaniment);
  rec.vocal_source = anchor.ref();
  rec.accompaniment_source = {partner.accompaniment.song_id, partner.accompaniment.offset_s};
  rec.match_score = sampled.scored[sampled.chosen].score;
  rec.temperature = config.temperature;
  rec.scored = std::move(sampled.scored);
  return rec;
}

RemixRecord remix_random(const StemSegments& anchor, SegmentSource& pool, int n_candidates,
                         RandomStream& rng) {
  if (n_candidates < 1) raise(ErrorKind::parameter, "n_candidates must be >= 1");
  if (pool.num_songs() == 0) raise(ErrorKind::insufficient, "candidate pool is empty");

  // Same draw protocol as pitch-aware so a shared seed yields the same
  // partner choices as T = infinity, just without the scoring pass.
  std::vector<StemSegments> candidates;
  candidates.reserve(static_cast<std::size_t>(n_candidates));
  for (int i = 0; i < n_candidates; ++i) candidates.push_back(pool.draw(rng));

  std::vector<double> probs(static_cast<std::size_t>(n_candidates),
                            1.0 / static_cast<double>(n_candidates));
  std::size_t chosen = draw_categorical(probs, rng);
  const StemSegments& partner = candidates[chosen];

  RemixRecord rec;
  rec.strategy = RemixStrategy::random;
  rec.vocal = anchor.vocal;
  rec.accompaniment = partner.accompaniment;
  rec.mixture = sum_segments(rec.vocal, rec.accompaniment);
  rec.vocal_source = anchor.ref();
  rec.accompaniment_source = {partner.accompaniment.song_id, partner.accompaniment.offset_s};
  return rec;
}

RemixRecord mix_audio_windows(const LoadedStems& song, std::size_t start1, std::size_t start2,
                              std::size_t segment_samples) {
  const std::size_t n = song.num_samples();
  if (start1 + segment_samples > n || start2 + segment_samples > n)
    raise(ErrorKind::bounds, "mix-audio window beyond song end");

  RemixRecord rec;
  rec.strategy = RemixStrategy::mix_audio;
  rec.vocal = window_of(song.vocal, start1, segment_samples);
  rec.accompaniment = window_of(song.accompaniment, start2, segment_samples);
  rec.mixture = sum_segments(rec.vocal, rec.accompaniment);
  rec.vocal_source = {song.song_id, rec.vocal.offset_s};
  rec.accompaniment_source = {song.song_id, rec.accompaniment.offset_s};
  return rec;
}

RemixRecord remix_mix_audio(const LoadedStems& song, RandomStream& rng, double segment_s) {
  const auto seg = static_cast<std::size_t>(std::llround(segment_s * kSampleRate));
  const std::size_t n = song.num_samples();
  if (seg == 0) raise(ErrorKind::parameter, "segment length must be positive");
  if (n < 2 * seg)
    raise(ErrorKind::insufficient,
          "song '" + song.song_id + "' too short for two disjoint " +
              std::to_string(segment_s) + " s windows");

  // Valid starts for the vocal window: those leaving room for a disjoint
  // partner, i.e. s1 <= n - 2*seg or s1 >= seg.
  const std::size_t lo_count = n - 2 * seg + 1;       // [0, n-2seg]
  const std::size_t hi_begin = std::max(seg, n - 2 * seg + 1);
  const std::size_t hi_count = (n - seg) >= hi_begin ? n - seg - hi_begin + 1 : 0;
  auto pick1 = rng.uniform_index(lo_count + hi_count);
  const std::size_t start1 = pick1 < lo_count ? pick1 : hi_begin + (pick1 - lo_count);

  // Partner window: any start with |s2 - s1| >= seg.
  const std::size_t left_count = start1 >= seg ? start1 - seg + 1 : 0;
  const std::size_t right_begin = start1 + seg;
  const std::size_t right_count = right_begin <= n - seg ? n - seg - right_begin + 1 : 0;
  auto pick2 = rng.uniform_index(left_count + right_count);
  const std::size_t start2 = pick2 < left_count ? pick2 : right_begin + (pick2 - left_count);

  return mix_audio_windows(song, start1, start2, seg);
}

} // namespace chromamix
