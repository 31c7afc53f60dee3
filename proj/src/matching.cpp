#include "chromamix/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chromamix/errors.hpp"

namespace chromamix {

const char* match_mode_name(MatchMode mode) {
  return mode == MatchMode::voc2voc ? "voc2voc" : "acc2acc";
}

MatchMode parse_match_mode(const std::string& name) {
  if (name == "voc2voc") return MatchMode::voc2voc;
  if (name == "acc2acc") return MatchMode::acc2acc;
  raise(ErrorKind::usage, "unknown match mode: " + name);
}

double match_score(const ChromaVector& a, const ChromaVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int c = 0; c < kNumChroma; ++c) {
    double x = a.values[static_cast<std::size_t>(c)];
    double y = b.values[static_cast<std::size_t>(c)];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0; // silence matches nothing
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> softmax_probs(std::span<const double> scores, double temperature) {
  if (scores.empty()) raise(ErrorKind::empty_input, "softmax of empty score list");
  if (temperature < 0.0) raise(ErrorKind::parameter, "temperature must be nonnegative");
  for (double s : scores)
    if (std::isnan(s)) raise(ErrorKind::invalid_input, "NaN score");

  const std::size_t n = scores.size();
  std::vector<double> probs(n);

  if (std::isinf(temperature)) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n));
    return probs;
  }
  if (temperature == 0.0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (scores[i] > scores[best]) best = i; // ties keep the lowest index
    probs[best] = 1.0;
    return probs;
  }

  double max_score = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp((scores[i] - max_score) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::size_t draw_categorical(std::span<const double> probs, RandomStream& rng) {
  if (probs.empty()) raise(ErrorKind::empty_input, "draw from empty distribution");
  double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1; // rounding left u at or above the total
}

SampleResult sample_partner(const AudioSegment& anchor, std::span<const AudioSegment> candidates,
                            const MatchConfig& config, RandomStream& rng) {
  if (candidates.empty()) raise(ErrorKind::empty_input, "no candidates to sample from");
  if (config.n_candidates < 1) raise(ErrorKind::parameter, "n_candidates must be >= 1");

  const StemRole wanted =
      config.mode == MatchMode::voc2voc ? StemRole::vocal : StemRole::accompaniment;
  if (anchor.stem != wanted)
    raise(ErrorKind::mode, std::string("anchor stem is ") + stem_role_name(anchor.stem) +
                               " but mode " + match_mode_name(config.mode) + " wants " +
                               stem_role_name(wanted));
  for (const auto& c : candidates)
    if (c.stem != wanted)
      raise(ErrorKind::mode, std::string("candidate stem is ") + stem_role_name(c.stem) +
                                 " but mode " + match_mode_name(config.mode) + " wants " +
                                 stem_role_name(wanted));

  const ChromaVector anchor_cv = chroma_vector(chromagram(anchor));
  std::vector<double> scores(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j)
    scores[j] = match_score(anchor_cv, chroma_vector(chromagram(candidates[j])));

  std::vector<double> probs = softmax_probs(scores, config.temperature);
  std::size_t chosen = draw_categorical(probs, rng);

  SampleResult result;
  result.chosen = chosen;
  result.scored.resize(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    auto& sc = result.scored[j];
    sc.candidate_id = candidates[j].song_id + "@" + std::to_string(candidates[j].offset_s);
    sc.score = scores[j];
    sc.probability = probs[j];
    sc.chosen = j == chosen;
  }
  return result;
}

} // namespace chromamix
