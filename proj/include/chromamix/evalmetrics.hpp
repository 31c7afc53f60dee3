#ifndef CHROMAMIX_EVALMETRICS_HPP
#define CHROMAMIX_EVALMETRICS_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chromamix/audio.hpp"

namespace chromamix {

inline constexpr double kSdrCapDb = 100.0;

// Energy-ratio SDR in dB: 10*log10(sum ref^2 / sum (ref-est)^2), capped at
// +100 dB when the residual drops below 1e-10 of the reference energy.
double sdr(const AudioSegment& reference, const AudioSegment& estimate);

struct SongStems {
  std::string song_id;
  AudioSegment vocal;
  AudioSegment accompaniment;
};

struct SourceMedians {
  std::optional<double> vocal_db;
  std::optional<double> accompaniment_db;
};

struct SegmentSdr {
  std::size_t segment_index = 0;
  std::optional<double> vocal_db;          // absent when the reference stem is silent
  std::optional<double> accompaniment_db;
};

struct SdrReport {
  std::map<std::string, std::vector<SegmentSdr>> per_segment;
  std::map<std::string, SourceMedians> per_song; // median over segments
  SourceMedians corpus;                          // median over songs
  std::optional<double> mean_of_sources;         // mean of the two corpus medians
  std::size_t skipped_vocal_segments = 0;
  std::size_t skipped_accompaniment_segments = 0;
};

// Non-overlapping segment_s windows, trailing partials dropped; segment
// SDRs per source aggregated as median-per-song then median-over-songs.
// References and estimates are matched by song_id.
SdrReport evaluate_separation(std::span<const SongStems> references,
                              std::span<const SongStems> estimates, double segment_s = 10.0);

std::string sdr_report_json(const SdrReport& report);

struct LossWeights {
  double lambda_audio = 1.0;
  double lambda_spec = 1.0;
  double lambda_voc = 1.0;
  double lambda_acc = 1.0;
};

// lambda_audio * mean|y - y_hat| + lambda_spec * mean||Y| - |Y_hat||,
// both terms elementwise l1 means.
double source_loss(const AudioSegment& y, const AudioSegment& y_hat, const LossWeights& weights);

// lambda_voc * L(voc pair) + lambda_acc * L(acc pair).
double total_loss(const AudioSegment& vocal, const AudioSegment& vocal_hat,
                  const AudioSegment& accompaniment, const AudioSegment& accompaniment_hat,
                  const LossWeights& weights);

double median(std::vector<double> values);

} // namespace chromamix

#endif
