#include "chromamix/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include <json.hpp>

#include "chromamix/errors.hpp"
#include "chromamix/stft.hpp"

namespace chromamix {

using nlohmann::json;

double median(std::vector<double> values) {
  if (values.empty()) raise(ErrorKind::empty_input, "median of empty list");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sdr(const AudioSegment& reference, const AudioSegment& estimate) {
  if (reference.samples.size() != estimate.samples.size())
    raise(ErrorKind::shape, "sdr: length mismatch " + std::to_string(reference.samples.size()) +
                                " vs " + std::to_string(estimate.samples.size()));
  double ref_energy = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    double r = reference.samples[i];
    double d = r - static_cast<double>(estimate.samples[i]);
    ref_energy += r * r;
    residual += d * d;
  }
  if (ref_energy == 0.0)
    raise(ErrorKind::undefined_reference, "sdr: reference has zero energy");
  if (residual < 1e-10 * ref_energy) return kSdrCapDb;
  return 10.0 * std::log10(ref_energy / residual);
}

namespace {

bool silent(const AudioSegment& seg) {
  for (float v : seg.samples)
    if (v != 0.0f) return false;
  return true;
}

struct SongEval {
  std::string song_id;
  std::vector<SegmentSdr> segments;
  std::size_t skipped_vocal = 0;
  std::size_t skipped_acc = 0;
};

SongEval evaluate_song(const SongStems& ref, const SongStems& est, std::size_t seg_samples) {
  SongEval out;
  out.song_id = ref.song_id;
  const std::size_t n = ref.vocal.samples.size();
  const std::size_t num_segments = n / seg_samples; // trailing partial dropped
  for (std::size_t s = 0; s < num_segments; ++s) {
    const double t0 = static_cast<double>(s * seg_samples) / kSampleRate;
    const double dt = static_cast<double>(seg_samples) / kSampleRate;
    SegmentSdr seg;
    seg.segment_index = s;
    AudioSegment rv = slice(ref.vocal, t0, dt);
    AudioSegment ra = slice(ref.accompaniment, t0, dt);
    if (silent(rv)) ++out.skipped_vocal;
    else seg.vocal_db = sdr(rv, slice(est.vocal, t0, dt));
    if (silent(ra)) ++out.skipped_acc;
    else seg.accompaniment_db = sdr(ra, slice(est.accompaniment, t0, dt));
    out.segments.push_back(std::move(seg));
  }
  return out;
}

std::optional<double> median_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return median(values);
}

} // namespace

SdrReport evaluate_separation(std::span<const SongStems> references,
                              std::span<const SongStems> estimates, double segment_s) {
  if (references.size() != estimates.size())
    raise(ErrorKind::validation, "reference and estimate song counts differ");
  if (segment_s <= 0.0) raise(ErrorKind::parameter, "segment_s must be positive");

  std::map<std::string, const SongStems*> est_by_id;
  for (const auto& e : estimates) est_by_id[e.song_id] = &e;

  const auto seg_samples = static_cast<std::size_t>(std::llround(segment_s * kSampleRate));
  std::vector<SongEval> evals(references.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(references.size()); ++i) {
    const auto& ref = references[static_cast<std::size_t>(i)];
    auto it = est_by_id.find(ref.song_id);
    if (it == est_by_id.end()) continue; // reported below, outside the loop
    const auto& est = *it->second;
    if (ref.vocal.samples.size() != est.vocal.samples.size() ||
        ref.accompaniment.samples.size() != est.accompaniment.samples.size())
      continue;
    evals[static_cast<std::size_t>(i)] = evaluate_song(ref, est, seg_samples);
  }

  // Validation reruns serially so errors carry the song id.
  for (const auto& ref : references) {
    auto it = est_by_id.find(ref.song_id);
    if (it == est_by_id.end())
      raise(ErrorKind::validation, "no estimate for song '" + ref.song_id + "'");
    const auto& est = *it->second;
    if (ref.vocal.samples.size() != est.vocal.samples.size() ||
        ref.accompaniment.samples.size() != est.accompaniment.samples.size())
      raise(ErrorKind::shape, "song '" + ref.song_id + "': stem lengths differ between reference and estimate");
  }

  SdrReport report;
  std::vector<double> song_voc, song_acc;
  bool any_segment = false;
  for (auto& ev : evals) {
    std::vector<double> voc, acc;
    for (const auto& seg : ev.segments) {
      if (seg.vocal_db) voc.push_back(*seg.vocal_db);
      if (seg.accompaniment_db) acc.push_back(*seg.accompaniment_db);
    }
    if (!ev.segments.empty()) any_segment = true;
    report.skipped_vocal_segments += ev.skipped_vocal;
    report.skipped_accompaniment_segments += ev.skipped_acc;

    SourceMedians sm;
    sm.vocal_db = median_of(voc);
    sm.accompaniment_db = median_of(acc);
    if (sm.vocal_db) song_voc.push_back(*sm.vocal_db);
    if (sm.accompaniment_db) song_acc.push_back(*sm.accompaniment_db);
    report.per_song[ev.song_id] = sm;
    report.per_segment[ev.song_id] = std::move(ev.segments);
  }
  if (!any_segment)
    raise(ErrorKind::empty_evaluation, "no song contains a complete " +
                                           std::to_string(segment_s) + " s segment");

  report.corpus.vocal_db = median_of(song_voc);
  report.corpus.accompaniment_db = median_of(song_acc);
  if (report.corpus.vocal_db && report.corpus.accompaniment_db)
    report.mean_of_sources = 0.5 * (*report.corpus.vocal_db + *report.corpus.accompaniment_db);
  return report;
}

std::string sdr_report_json(const SdrReport& report) {
  json j;
  json per_song = json::object();
  for (const auto& [id, sm] : report.per_song) {
    json s;
    if (sm.vocal_db) s["vocal_db"] = *sm.vocal_db;
    if (sm.accompaniment_db) s["accompaniment_db"] = *sm.accompaniment_db;
    per_song[id] = s;
  }
  json per_segment = json::object();
  for (const auto& [id, segs] : report.per_segment) {
    json arr = json::array();
    for (const auto& seg : segs) {
      json s{{"index", seg.segment_index}};
      if (seg.vocal_db) s["vocal_db"] = *seg.vocal_db;
      if (seg.accompaniment_db) s["accompaniment_db"] = *seg.accompaniment_db;
      arr.push_back(s);
    }
    per_segment[id] = arr;
  }
  j["per_song"] = per_song;
  j["per_segment"] = per_segment;
  if (report.corpus.vocal_db) j["corpus"]["vocal_db"] = *report.corpus.vocal_db;
  if (report.corpus.accompaniment_db)
    j["corpus"]["accompaniment_db"] = *report.corpus.accompaniment_db;
  if (report.mean_of_sources) j["mean_of_sources"] = *report.mean_of_sources;
  j["skipped_vocal_segments"] = report.skipped_vocal_segments;
  j["skipped_accompaniment_segments"] = report.skipped_accompaniment_segments;
  return j.dump(2);
}

double source_loss(const AudioSegment& y, const AudioSegment& y_hat, const LossWeights& weights) {
  if (y.samples.size() != y_hat.samples.size())
    raise(ErrorKind::shape, "source_loss: length mismatch");
  if (y.samples.empty()) raise(ErrorKind::empty_input, "source_loss of empty segments");

  double loss = 0.0;
  if (weights.lambda_audio != 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.samples.size(); ++i)
      acc += std::abs(static_cast<double>(y.samples[i]) - y_hat.samples[i]);
    loss += weights.lambda_audio * acc / static_cast<double>(y.samples.size());
  }
  if (weights.lambda_spec != 0.0) {
    RealMatrix my = magnitude(stft(y));
    RealMatrix mh = magnitude(stft(y_hat));
    double acc = 0.0;
    for (std::size_t i = 0; i < my.data.size(); ++i) acc += std::abs(my.data[i] - mh.data[i]);
    loss += weights.lambda_spec * acc / static_cast<double>(my.data.size());
  }
  return loss;
}

double total_loss(const AudioSegment& vocal, const AudioSegment& vocal_hat,
                  const AudioSegment& accompaniment, const AudioSegment& accompaniment_hat,
                  const LossWeights& weights) {
  return weights.lambda_voc * source_loss(vocal, vocal_hat, weights) +
         weights.lambda_acc * source_loss(accompaniment, accompaniment_hat, weights);
}

} // namespace chromamix
