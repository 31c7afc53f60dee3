#ifndef CHROMAMIX_MATCHING_HPP
#define CHROMAMIX_MATCHING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chromamix/audio.hpp"
#include "chromamix/chroma.hpp"
#include "chromamix/rng.hpp"

namespace chromamix {

enum class MatchMode { voc2voc, acc2acc };

const char* match_mode_name(MatchMode mode);
MatchMode parse_match_mode(const std::string& name);

struct MatchConfig {
  int n_candidates = 8;
  double temperature = 0.33; // >= 0; infinity selects uniformly
  MatchMode mode = MatchMode::acc2acc;
  double segment_s = 10.0;
  std::uint64_t seed = 42;
};

struct ScoredCandidate {
  std::string candidate_id;
  double score = 0.0;       // cosine similarity in [-1, 1]
  double probability = 0.0; // softmax output
  bool chosen = false;
};

// Normalized zero-lag cross-correlation (cosine) of two chroma vectors.
// A zero-norm vector scores 0 against everything.
double match_score(const ChromaVector& a, const ChromaVector& b);

// Temperature softmax with max-subtraction. T = 0 is exact argmax with
// lowest-index tie-breaking; T = infinity is uniform.
std::vector<double> softmax_probs(std::span<const double> scores, double temperature);

// One draw from a categorical distribution; consumes exactly one uniform.
std::size_t draw_categorical(std::span<const double> probs, RandomStream& rng);

struct SampleResult {
  std::size_t chosen = 0;
  std::vector<ScoredCandidate> scored;
};

// Scores candidates against the anchor on their chroma vectors and draws
// a partner index at config.temperature. All segments must carry the stem
// role named by config.mode.
SampleResult sample_partner(const AudioSegment& anchor, std::span<const AudioSegment> candidates,
                            const MatchConfig& config, RandomStream& rng);

} // namespace chromamix

#endif
