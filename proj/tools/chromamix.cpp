// chromamix: corpus synthesis, chroma inspection, pitch-aware augmentation,
// SDR evaluation, and self-training orchestration behind one binary.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chromamix/chroma.hpp"
#include "chromamix/dataset.hpp"
#include "chromamix/errors.hpp"
#include "chromamix/evalmetrics.hpp"
#include "chromamix/matching.hpp"
#include "chromamix/parallel.hpp"
#include "chromamix/remix.hpp"
#include "chromamix/rng.hpp"
#include "chromamix/selftrain.hpp"
#include "chromamix/wav.hpp"

using json = nlohmann::json;
using namespace chromamix;

namespace {

// Exit codes: 0 ok, 2 usage, 3 I/O or format, 4 validation, 5 partial failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;
constexpr int kExitPartial = 5;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::io:
    case ErrorKind::format: return kExitIo;
    default: return kExitValidation;
  }
}

int g_log_level = 1; // 0 = error, 1 = warn, 2 = info, 3 = debug

void log_warn(const std::string& msg) {
  if (g_log_level >= 1) std::fprintf(stderr, "warning: %s\n", msg.c_str());
}
void log_info(const std::string& msg) {
  if (g_log_level >= 2) std::fprintf(stderr, "info: %s\n", msg.c_str());
}

int parse_log_level(const std::string& name) {
  if (name == "error") return 0;
  if (name == "warn") return 1;
  if (name == "info") return 2;
  if (name == "debug") return 3;
  raise(ErrorKind::usage, "unknown log level: " + name);
}

// Stream-id domains; every command derives its randomness from
// (--seed, domain, index) so runs are reproducible artifact-for-artifact.
constexpr std::uint64_t kStreamSynth = 1;
constexpr std::uint64_t kStreamAugment = 2;

double parse_temperature(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF")
    return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos == text.size() && v >= 0.0) return v;
  } catch (...) {
  }
  raise(ErrorKind::usage, "temperature must be a nonnegative number or 'inf'");
}

// ---- synth -------------------------------------------------------------

struct SynthArgs {
  std::string spec_path;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& args, std::uint64_t seed, bool json_out) {
  CorpusSpec spec = load_corpus_spec(args.spec_path);
  RandomStream rng(seed, kStreamSynth);
  Manifest manifest = synth_corpus(spec, args.out_dir, rng);
  auto manifest_path = std::filesystem::path(args.out_dir) / "manifest.jsonl";
  if (!spec.songs.empty()) save_manifest(manifest, manifest_path);
  if (json_out) {
    json j{{"songs", manifest.entries.size()},
           {"manifest", spec.songs.empty() ? "" : manifest_path.string()}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "synthesized " << manifest.entries.size() << " songs"
              << (spec.songs.empty() ? "" : " -> " + manifest_path.string()) << "\n";
  }
  return kExitOk;
}

// ---- chroma ------------------------------------------------------------

struct ChromaArgs {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
};

int cmd_chroma(const ChromaArgs& args, bool json_out) {
  std::filesystem::create_directories(args.out_dir);
  std::vector<ChromaVector> vectors;
  std::vector<std::string> names;

  for (const auto& input : args.inputs) {
    AudioSegment seg = load_wav(input);
    Chromagram cgram = chromagram(seg);
    ChromaVector cv = chroma_vector(cgram);
    bool is_silent = true;
    for (double v : cv.values)
      if (v != 0.0) is_silent = false;
    if (is_silent) log_warn(input + ": silent input, zero chroma vector");

    std::string base = std::filesystem::path(input).stem().string();
    auto csv_path = std::filesystem::path(args.out_dir) / (base + ".chroma.csv");
    std::ofstream csv(csv_path);
    if (!csv) raise(ErrorKind::io, "cannot write " + csv_path.string());
    write_chroma_csv(cgram, csv);

    json jv{{"input", input}, {"argmax", cv.argmax()}, {"values", cv.values}};
    auto vec_path = std::filesystem::path(args.out_dir) / (base + ".vector.json");
    std::ofstream vec(vec_path);
    if (!vec) raise(ErrorKind::io, "cannot write " + vec_path.string());
    vec << jv.dump(2) << "\n";

    vectors.push_back(cv);
    names.push_back(base);
  }

  json summary;
  summary["inputs"] = names;
  if (vectors.size() > 1) {
    std::vector<std::vector<double>> table(vectors.size(),
                                           std::vector<double>(vectors.size(), 0.0));
    for (std::size_t i = 0; i < vectors.size(); ++i)
      for (std::size_t j = 0; j < vectors.size(); ++j)
        table[i][j] = match_score(vectors[i], vectors[j]);
    summary["scores"] = table;

    auto scores_path = std::filesystem::path(args.out_dir) / "scores.json";
    std::ofstream scores(scores_path);
    scores << summary.dump(2) << "\n";

    if (!json_out) {
      std::cout << "pairwise chroma scores:\n";
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = 0; j < vectors.size(); ++j) std::printf("  %6.3f", table[i][j]);
        std::printf("  %s\n", names[i].c_str());
      }
    }
  }
  if (json_out) std::cout << summary.dump() << "\n";
  return kExitOk;
}

// ---- augment -----------------------------------------------------------

struct AugmentArgs {
  std::string manifest_path;
  std::string strategy = "pitch_aware";
  std::string temperature = "0.33";
  int n_candidates = 8;
  std::string mode = "acc2acc";
  int count = 1;
  double segment_s = 10.0;
  double remix_prob = 1.0;
  std::string out_dir;
};

struct RemixOutcome {
  bool produced = false;
  std::string error;
  double score = 0.0; // realized chosen-partner score (pitch_aware only)
  bool has_score = false;
};

json sidecar_json(const RemixRecord& rec, std::uint64_t seed, int index, bool remixed) {
  json j{{"strategy", remix_strategy_name(rec.strategy)},
         {"index", index},
         {"seed", seed},
         {"remixed", remixed},
         {"anchor", {{"song_id", rec.vocal_source.song_id},
                     {"offset_s", rec.vocal_source.offset_s}}},
         {"partner", {{"song_id", rec.accompaniment_source.song_id},
                      {"offset_s", rec.accompaniment_source.offset_s}}}};
  if (rec.match_score) j["score"] = *rec.match_score;
  if (rec.temperature) {
    if (std::isinf(*rec.temperature)) j["temperature"] = "inf";
    else j["temperature"] = *rec.temperature;
  }
  if (!rec.scored.empty()) {
    json cands = json::array();
    for (const auto& sc : rec.scored)
      cands.push_back(json{{"candidate_id", sc.candidate_id},
                           {"score", sc.score},
                           {"probability", sc.probability},
                           {"chosen", sc.chosen}});
    j["candidates"] = cands;
  }
  return j;
}

int cmd_augment(const AugmentArgs& args, std::uint64_t seed, bool json_out) {
  const RemixStrategy strategy = parse_remix_strategy(args.strategy);
  const double temperature = parse_temperature(args.temperature);
  const MatchMode mode = parse_match_mode(args.mode);
  if (args.count < 1) raise(ErrorKind::usage, "--count must be >= 1");
  if (args.n_candidates < 1) raise(ErrorKind::usage, "--n must be >= 1");
  if (args.remix_prob < 0.0 || args.remix_prob > 1.0)
    raise(ErrorKind::usage, "--remix-prob must be in [0, 1]");

  Manifest manifest = load_manifest(args.manifest_path);
  for (const auto& e : manifest.entries)
    if (!e.has_stems())
      raise(ErrorKind::validation, "augment needs stem pairs; entry '" + e.song_id + "' has none");
  StemCache cache(manifest);

  const auto seg_samples = static_cast<std::size_t>(std::llround(args.segment_s * kSampleRate));
  std::vector<const LoadedStems*> anchors_pool;
  for (const auto& e : manifest.entries) {
    const LoadedStems& stems = cache.get(e.song_id);
    // mix_audio needs 2x the window per song; that failure is reported
    // per remix below so the exit code can signal partial failure
    if (stems.num_samples() >= seg_samples) anchors_pool.push_back(&stems);
  }
  if (anchors_pool.empty())
    raise(ErrorKind::insufficient, "no song in the manifest is long enough for " +
                                       std::to_string(args.segment_s) + " s windows");

  std::filesystem::create_directories(args.out_dir);
  const auto out_dir = std::filesystem::path(args.out_dir);

  std::vector<RemixOutcome> outcomes(static_cast<std::size_t>(args.count));

#pragma omp parallel for schedule(dynamic)
  for (int index = 0; index < args.count; ++index) {
    auto& outcome = outcomes[static_cast<std::size_t>(index)];
    try {
      RandomStream rng(seed, (kStreamAugment << 48) | static_cast<std::uint64_t>(index));

      // anchor song and window
      const LoadedStems* anchor_song = anchors_pool[rng.uniform_index(anchors_pool.size())];
      const std::size_t max_start = anchor_song->num_samples() - seg_samples;
      const auto start = static_cast<std::size_t>(rng.uniform_index(max_start + 1));
      const double start_s = static_cast<double>(start) / kSampleRate;
      StemSegments anchor{slice(anchor_song->vocal, start_s, args.segment_s),
                          slice(anchor_song->accompaniment, start_s, args.segment_s)};

      // the probability gate always consumes one uniform, so artifact
      // streams line up across --remix-prob settings
      const bool remix_this = rng.next_double() < args.remix_prob;

      RemixRecord rec;
      if (!remix_this) {
        rec.strategy = strategy;
        rec.vocal = anchor.vocal;
        rec.accompaniment = anchor.accompaniment;
        rec.vocal_source = anchor.ref();
        rec.accompaniment_source = {anchor.accompaniment.song_id, anchor.accompaniment.offset_s};
        AudioSegment mix;
        mix.samples.resize(anchor.vocal.samples.size());
        for (std::size_t i = 0; i < mix.samples.size(); ++i)
          mix.samples[i] = anchor.vocal.samples[i] + anchor.accompaniment.samples[i];
        rec.mixture = std::move(mix);
      } else if (strategy == RemixStrategy::mix_audio) {
        rec = remix_mix_audio(*anchor_song, rng, args.segment_s);
      } else {
        ManifestSegmentSource pool(cache, args.segment_s, anchor_song->song_id);
        if (strategy == RemixStrategy::pitch_aware) {
          MatchConfig config;
          config.n_candidates = args.n_candidates;
          config.temperature = temperature;
          config.mode = mode;
          config.segment_s = args.segment_s;
          config.seed = seed;
          rec = remix_pitch_aware(anchor, pool, config, rng);
        } else {
          rec = remix_random(anchor, pool, args.n_candidates, rng);
        }
      }

      char stem_name[32];
      std::snprintf(stem_name, sizeof(stem_name), "remix_%06d", index);
      const std::string base = stem_name;
      save_wav(rec.mixture, out_dir / (base + "_mixture.wav"));
      save_wav(rec.vocal, out_dir / (base + "_vocal.wav"));
      save_wav(rec.accompaniment, out_dir / (base + "_accompaniment.wav"));
      std::ofstream sidecar(out_dir / (base + ".json"));
      sidecar << sidecar_json(rec, seed, index, remix_this).dump(2) << "\n";

      outcome.produced = true;
      if (rec.match_score) {
        outcome.score = *rec.match_score;
        outcome.has_score = true;
      }
    } catch (const Error& e) {
      outcome.error = e.what();
    }
  }

  // deterministic summary, assembled in index order
  std::size_t produced = 0, failed = 0, scored = 0;
  double mean = 0.0, m2 = 0.0;
  std::array<std::size_t, 20> histogram{}; // score buckets over [-1, 1]
  for (const auto& outcome : outcomes) {
    if (!outcome.produced) {
      ++failed;
      continue;
    }
    ++produced;
    if (outcome.has_score) {
      ++scored;
      double delta = outcome.score - mean;
      mean += delta / static_cast<double>(scored);
      m2 += delta * (outcome.score - mean);
      auto bucket = static_cast<std::size_t>(
          std::clamp(static_cast<int>((outcome.score + 1.0) * 10.0), 0, 19));
      ++histogram[bucket];
    }
  }
  const double variance = scored > 1 ? m2 / static_cast<double>(scored) : 0.0;

  json summary{{"strategy", args.strategy},
               {"count", args.count},
               {"produced", produced},
               {"failed", failed},
               {"n_candidates", args.n_candidates},
               {"mode", args.mode},
               {"segment_s", args.segment_s},
               {"seed", seed},
               {"remix_prob", args.remix_prob}};
  summary["temperature"] = std::isinf(temperature) ? json("inf") : json(temperature);
  if (scored > 0) {
    summary["score_mean"] = mean;
    summary["score_variance"] = variance;
    summary["score_histogram"] = histogram;
  }
  {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(2) << "\n";
  }

  for (int index = 0; index < args.count; ++index)
    if (!outcomes[static_cast<std::size_t>(index)].error.empty())
      log_warn("remix " + std::to_string(index) + ": " +
               outcomes[static_cast<std::size_t>(index)].error);

  if (json_out) std::cout << summary.dump() << "\n";
  else
    std::cout << "produced " << produced << "/" << args.count << " remixes -> "
              << out_dir.string() << "\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

// ---- eval --------------------------------------------------------------

struct EvalArgs {
  std::string ref_path;
  std::string est_path;
  double segment_s = 10.0;
  std::string report_path;
};

int cmd_eval(const EvalArgs& args, bool json_out) {
  Manifest ref_manifest = load_manifest(args.ref_path);
  Manifest est_manifest = load_manifest(args.est_path);

  std::vector<SongStems> refs, ests;
  for (const auto& e : ref_manifest.entries) {
    if (!e.has_stems())
      raise(ErrorKind::validation, "reference entry '" + e.song_id + "' lacks stems");
    LoadedStems stems = load_stems(ref_manifest, e);
    refs.push_back({e.song_id, std::move(stems.vocal), std::move(stems.accompaniment)});
  }
  for (const auto& e : est_manifest.entries) {
    if (!e.has_stems())
      raise(ErrorKind::validation, "estimate entry '" + e.song_id + "' lacks stems");
    LoadedStems stems = load_stems(est_manifest, e);
    ests.push_back({e.song_id, std::move(stems.vocal), std::move(stems.accompaniment)});
  }
  if (refs.empty()) raise(ErrorKind::empty_evaluation, "no songs to evaluate");

  SdrReport report = evaluate_separation(refs, ests, args.segment_s);

  if (!args.report_path.empty()) {
    std::ofstream out(args.report_path);
    if (!out) raise(ErrorKind::io, "cannot write " + args.report_path);
    out << sdr_report_json(report) << "\n";
  }

  if (json_out) {
    std::cout << sdr_report_json(report) << "\n";
  } else {
    auto fmt = [](const std::optional<double>& v) {
      char buf[32];
      if (v) std::snprintf(buf, sizeof(buf), "%.2f", *v);
      else std::snprintf(buf, sizeof(buf), "n/a");
      return std::string(buf);
    };
    std::cout << "SDR (V)  SDR (A)  Mean\n";
    std::cout << fmt(report.corpus.vocal_db) << "    " << fmt(report.corpus.accompaniment_db)
              << "    " << fmt(report.mean_of_sources) << "\n";
  }
  return kExitOk;
}

// ---- selftrain ---------------------------------------------------------

struct SelfTrainArgs {
  std::string unlabeled_path;
  std::string separator = "identity";
  std::string truth_path;
  std::string labeled_path;
  double vad_threshold = 0.01;
  double vad_frame_s = 0.03;
  double vad_min_voiced = 0.1;
  std::string out_dir;
};

int cmd_selftrain(const SelfTrainArgs& args, bool json_out) {
  Manifest unlabeled = load_manifest(args.unlabeled_path);

  Manifest truth;
  std::unique_ptr<Separator> separator;
  if (args.separator == "identity") {
    separator = make_identity_separator();
  } else if (args.separator == "irm") {
    if (args.truth_path.empty())
      raise(ErrorKind::usage, "--separator irm requires --truth <labeled manifest>");
    truth = load_manifest(args.truth_path);
    separator = make_irm_manifest_separator(truth);
  } else if (args.separator.rfind("extern:", 0) == 0) {
    separator = make_external_separator(args.separator.substr(7));
  } else {
    raise(ErrorKind::usage, "unknown separator: " + args.separator);
  }

  const auto out_dir = std::filesystem::path(args.out_dir);
  std::filesystem::create_directories(out_dir);

  log_info("pseudo-labeling " + std::to_string(unlabeled.entries.size()) + " songs");
  PseudoLabelResult pseudo = pseudo_label(unlabeled, *separator, out_dir / "pseudo");
  save_manifest(pseudo.manifest, out_dir / "pseudo.jsonl");
  for (const auto& f : pseudo.failures) log_warn("skipped '" + f.song_id + "': " + f.message);

  VadConfig vad;
  vad.rms_threshold = args.vad_threshold;
  vad.frame_s = args.vad_frame_s;
  vad.min_voiced_fraction = args.vad_min_voiced;
  VadResult filtered = vad_filter(pseudo.manifest, vad);
  save_manifest(filtered.manifest, out_dir / "filtered.jsonl");

  bool built_student = false;
  if (!args.labeled_path.empty()) {
    Manifest labeled = load_manifest(args.labeled_path);
    Manifest student = build_student_dataset(labeled, filtered.manifest);
    save_manifest(student, out_dir / "student.jsonl");
    built_student = true;
  }

  json summary{{"unlabeled", unlabeled.entries.size()},
               {"pseudo_labeled", pseudo.manifest.entries.size()},
               {"failures", pseudo.failures.size()},
               {"vad_kept", filtered.kept},
               {"vad_dropped", filtered.dropped},
               {"student_manifest", built_student}};
  if (json_out) std::cout << summary.dump() << "\n";
  else
    std::cout << "pseudo-labeled " << pseudo.manifest.entries.size() << "/"
              << unlabeled.entries.size() << ", VAD kept " << filtered.kept << ", dropped "
              << filtered.dropped << (built_student ? ", student manifest written" : "") << "\n";
  return pseudo.failures.empty() ? kExitOk : kExitPartial;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"chromagram-based pitch-aware remixing toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  int jobs = 0;
  bool json_out = false;
  std::string log_level;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--jobs", jobs, "max worker threads (0 = auto)");
  app.add_flag("--json", json_out, "machine-readable summary on stdout");
  app.add_option("--log-level", log_level, "error|warn|info|debug (or env CHROMAMIX_LOG)");

  app.fallthrough(); // global flags may follow the subcommand

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "render a synthetic stem corpus");
  synth->add_option("--spec", synth_args.spec_path, "corpus spec JSON")->required();
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();

  ChromaArgs chroma_args;
  auto* chroma_cmd = app.add_subcommand("chroma", "chromagrams, chroma vectors, score tables");
  chroma_cmd->add_option("inputs", chroma_args.inputs, "input WAV files")->required();
  chroma_cmd->add_option("--out", chroma_args.out_dir, "output directory")
      ->capture_default_str();

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "write remixed mixture/stem triplets");
  augment->add_option("--manifest", augment_args.manifest_path, "labeled manifest")->required();
  augment->add_option("--strategy", augment_args.strategy, "pitch_aware|random|mix_audio")
      ->capture_default_str();
  augment->add_option("--T", augment_args.temperature, "softmax temperature or 'inf'")
      ->capture_default_str();
  augment->add_option("--n", augment_args.n_candidates, "candidates per anchor")
      ->capture_default_str();
  augment->add_option("--mode", augment_args.mode, "voc2voc|acc2acc")->capture_default_str();
  augment->add_option("--count", augment_args.count, "number of remixes")->required();
  augment->add_option("--segment", augment_args.segment_s, "window length in seconds")
      ->capture_default_str();
  augment->add_option("--remix-prob", augment_args.remix_prob,
                      "probability of remixing an anchor (else keep its own pair)")
      ->capture_default_str();
  augment->add_option("--out", augment_args.out_dir, "output directory")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "median-of-medians SDR evaluation");
  eval->add_option("--ref", eval_args.ref_path, "reference manifest")->required();
  eval->add_option("--est", eval_args.est_path, "estimate manifest")->required();
  eval->add_option("--segment", eval_args.segment_s, "segment length in seconds")
      ->capture_default_str();
  eval->add_option("--report", eval_args.report_path, "write full JSON report here");

  SelfTrainArgs selftrain_args;
  auto* selftrain = app.add_subcommand("selftrain", "pseudo-label, VAD-filter, build student set");
  selftrain->add_option("--unlabeled", selftrain_args.unlabeled_path, "unlabeled manifest")
      ->required();
  selftrain->add_option("--separator", selftrain_args.separator, "identity|irm|extern:<cmd>")
      ->capture_default_str();
  selftrain->add_option("--truth", selftrain_args.truth_path, "ground-truth manifest for irm");
  selftrain->add_option("--labeled", selftrain_args.labeled_path,
                        "labeled manifest to union into the student set");
  selftrain->add_option("--vad-threshold", selftrain_args.vad_threshold, "frame RMS threshold")
      ->capture_default_str();
  selftrain->add_option("--vad-frame", selftrain_args.vad_frame_s, "VAD frame seconds")
      ->capture_default_str();
  selftrain->add_option("--vad-min-voiced", selftrain_args.vad_min_voiced,
                        "minimum voiced fraction")
      ->capture_default_str();
  selftrain->add_option("--out", selftrain_args.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (const char* env = std::getenv("CHROMAMIX_LOG")) g_log_level = parse_log_level(env);
    if (!log_level.empty()) g_log_level = parse_log_level(log_level);
    if (jobs > 0) set_max_threads(jobs);

    if (synth->parsed()) return cmd_synth(synth_args, seed, json_out);
    if (chroma_cmd->parsed()) return cmd_chroma(chroma_args, json_out);
    if (augment->parsed()) return cmd_augment(augment_args, seed, json_out);
    if (eval->parsed()) return cmd_eval(eval_args, json_out);
    if (selftrain->parsed()) return cmd_selftrain(selftrain_args, json_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitUsage;
}
