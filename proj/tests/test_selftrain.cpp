#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "chromamix/errors.hpp"
#include "chromamix/evalmetrics.hpp"
#include "chromamix/selftrain.hpp"
#include "chromamix/wav.hpp"
#include "test_support.hpp"

using namespace chromamix;
using namespace chromamix::test;

namespace {

// Labeled corpus plus the matching unlabeled (mixture-only) view of it.
struct SelfTrainFixture {
  TempDir dir{"selftrain"};
  Manifest labeled;
  Manifest unlabeled;

  explicit SelfTrainFixture(int n_songs, double duration_s = 20.0) {
    CorpusSpec spec;
    for (int i = 0; i < n_songs; ++i) {
      SynthSongSpec s;
      s.song_id = "song" + std::to_string(i);
      s.key = (5 * i) % 12;
      s.duration_s = duration_s;
      s.melody = i % 2 == 0 ? "steps" : "sparse";
      spec.songs.push_back(std::move(s));
    }
    RandomStream rng(42, 200);
    labeled = synth_corpus(spec, dir.path() / "corpus", rng);
    unlabeled = labeled;
    unlabeled.kind = ManifestKind::unlabeled;
    for (auto& e : unlabeled.entries) {
      e.vocal.clear();
      e.accompaniment.clear();
    }
  }
};

} // namespace

TEST_CASE("identity separator passes the mixture through as vocal") {
  SelfTrainFixture fx(2);
  auto sep = make_identity_separator();
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pseudo");

  CHECK(res.failures.empty());
  REQUIRE(res.manifest.entries.size() == 2);
  CHECK(res.manifest.kind == ManifestKind::pseudo_labeled);
  for (const auto& e : res.manifest.entries) {
    CHECK(e.provenance == "identity");
    AudioSegment voc = load_wav(res.manifest.resolve(e.vocal));
    AudioSegment mix = load_wav(fx.unlabeled.resolve(fx.unlabeled.find(e.song_id)->mixture));
    CHECK(voc.samples == mix.samples);
    AudioSegment acc = load_wav(res.manifest.resolve(e.accompaniment));
    for (float v : acc.samples) CHECK(v == 0.0f);
  }
}

TEST_CASE("empty unlabeled manifest round trips") {
  TempDir dir("selftrain-empty");
  Manifest empty;
  empty.kind = ManifestKind::unlabeled;
  auto sep = make_identity_separator();
  PseudoLabelResult res = pseudo_label(empty, *sep, dir.path() / "out");
  CHECK(res.manifest.entries.empty());
  CHECK(res.failures.empty());
}

TEST_CASE("IRM oracle on disjoint-spectrum stems") {
  TempDir dir("irm-disjoint");
  LoadedStems truth;
  truth.song_id = "x";
  truth.vocal = make_tone(1000.0, 4.0, 0.5);
  truth.vocal.stem = StemRole::vocal;
  truth.accompaniment = make_tone(3000.0, 4.0, 0.5);
  truth.accompaniment.stem = StemRole::accompaniment;

  AudioSegment mixture;
  mixture.samples.resize(truth.vocal.samples.size());
  for (std::size_t i = 0; i < mixture.samples.size(); ++i)
    mixture.samples[i] = truth.vocal.samples[i] + truth.accompaniment.samples[i];
  mixture.song_id = "x";

  auto sep = make_irm_separator(truth);
  auto [voc_est, acc_est] = sep->separate(mixture);
  CHECK(voc_est.samples.size() == mixture.samples.size());

  CHECK(sdr(truth.vocal, voc_est) > 20.0);
  CHECK(sdr(truth.accompaniment, acc_est) > 20.0);

  // mask complementarity: estimates sum back to the mixture
  double max_err = 0.0;
  for (std::size_t i = 0; i < mixture.samples.size(); ++i)
    max_err = std::max(max_err, std::abs(static_cast<double>(voc_est.samples[i]) +
                                         acc_est.samples[i] - mixture.samples[i]));
  CHECK(max_err < 1e-6);
}

TEST_CASE("IRM oracle with a silent vocal stem") {
  LoadedStems truth;
  truth.song_id = "x";
  truth.vocal.samples.assign(32000, 0.0f);
  truth.accompaniment = make_tone(500.0, 2.0, 0.8);

  AudioSegment mixture = truth.accompaniment;
  mixture.song_id = "x";
  mixture.stem = StemRole::mixture;

  auto sep = make_irm_separator(truth);
  auto [voc_est, acc_est] = sep->separate(mixture);

  double voc_energy = 0.0, mix_energy = 0.0;
  for (std::size_t i = 0; i < mixture.samples.size(); ++i) {
    voc_energy += static_cast<double>(voc_est.samples[i]) * voc_est.samples[i];
    mix_energy += static_cast<double>(mixture.samples[i]) * mixture.samples[i];
  }
  CHECK(voc_energy < 1e-6 * mix_energy);
}

TEST_CASE("IRM oracle rejects stems shorter than the mixture") {
  LoadedStems truth;
  truth.song_id = "x";
  truth.vocal = make_noise(1000, 1);
  truth.accompaniment = make_noise(1000, 2);
  AudioSegment mixture = make_noise(2000, 3);
  mixture.song_id = "x";
  auto sep = make_irm_separator(truth);
  try {
    sep->separate(mixture);
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::shape);
  }
}

TEST_CASE("IRM pseudo-labels beat the mixture-as-estimate baseline per song") {
  SelfTrainFixture fx(4);
  auto sep = make_irm_manifest_separator(fx.labeled);
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pseudo");
  CHECK(res.failures.empty());
  REQUIRE(res.manifest.entries.size() == 4);

  for (const auto& e : res.manifest.entries) {
    LoadedStems truth = load_stems(fx.labeled, *fx.labeled.find(e.song_id));
    AudioSegment mixture = load_wav(fx.unlabeled.resolve(fx.unlabeled.find(e.song_id)->mixture));
    AudioSegment voc_est = load_wav(res.manifest.resolve(e.vocal));
    double irm_sdr = sdr(truth.vocal, voc_est);
    double baseline = sdr(truth.vocal, mixture);
    CHECK(irm_sdr > baseline);
  }
}

TEST_CASE("separator failures are recorded and skipped") {
  SelfTrainFixture fx(3);
  Manifest truth_missing_one = fx.labeled;
  truth_missing_one.entries.erase(truth_missing_one.entries.begin() + 1);

  auto sep = make_irm_manifest_separator(truth_missing_one);
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pseudo2");
  CHECK(res.manifest.entries.size() == 2);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].song_id == "song1");
}

TEST_CASE("vad filter keeps active vocals and drops silent ones") {
  TempDir dir("vad");
  // active: continuous tone; sparse: 5% duty cycle; silent: zeros
  AudioSegment active = make_tone(440.0, 5.0, 0.5);
  AudioSegment sparse;
  sparse.samples.assign(80000, 0.0f);
  for (std::size_t i = 0; i < 4000; ++i) sparse.samples[i] = 0.5f; // 5% of frames voiced
  AudioSegment silent;
  silent.samples.assign(80000, 0.0f);

  Manifest pseudo;
  pseudo.kind = ManifestKind::pseudo_labeled;
  pseudo.base_dir = dir.path();
  int idx = 0;
  for (const auto* seg : {&active, &sparse, &silent}) {
    std::string base = "e" + std::to_string(idx++);
    save_wav(*seg, dir.path() / (base + "_v.wav"));
    AudioSegment acc;
    acc.samples.assign(seg->samples.size(), 0.1f);
    save_wav(acc, dir.path() / (base + "_a.wav"));
    pseudo.entries.push_back({base, base + "_v.wav", base + "_a.wav", "", 5.0, "irm"});
  }

  VadConfig config; // threshold 0.01, min fraction 0.1
  VadResult res = vad_filter(pseudo, config);
  CHECK(res.kept == 1);
  CHECK(res.dropped == 2);
  REQUIRE(res.manifest.entries.size() == 1);
  CHECK(res.manifest.entries[0].song_id == "e0");

  // all-silent estimates -> empty manifest
  Manifest silent_only;
  silent_only.kind = ManifestKind::pseudo_labeled;
  silent_only.base_dir = dir.path();
  silent_only.entries.push_back(pseudo.entries[2]);
  CHECK(vad_filter(silent_only, config).manifest.entries.empty());

  // full-scale continuous vocal -> kept
  Manifest active_only;
  active_only.kind = ManifestKind::pseudo_labeled;
  active_only.base_dir = dir.path();
  active_only.entries.push_back(pseudo.entries[0]);
  CHECK(vad_filter(active_only, config).kept == 1);
}

TEST_CASE("vad monotonicity in the threshold") {
  SelfTrainFixture fx(6);
  auto sep = make_irm_manifest_separator(fx.labeled);
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pseudo-vad");

  std::size_t prev_kept = res.manifest.entries.size() + 1;
  for (double thr : {0.001, 0.01, 0.05, 0.15, 0.5}) {
    VadConfig config;
    config.rms_threshold = thr;
    VadResult filtered = vad_filter(res.manifest, config);
    CHECK(filtered.kept <= prev_kept);
    prev_kept = filtered.kept;
  }
}

TEST_CASE("vad config validation") {
  Manifest empty;
  VadConfig bad;
  bad.min_voiced_fraction = 0.0;
  CHECK_THROWS_AS(vad_filter(empty, bad), Error);
  bad.min_voiced_fraction = 0.5;
  bad.rms_threshold = -1.0;
  CHECK_THROWS_AS(vad_filter(empty, bad), Error);
}

TEST_CASE("student dataset union namespaces ids and flags provenance") {
  SelfTrainFixture fx(3);
  auto sep = make_irm_manifest_separator(fx.labeled);
  PseudoLabelResult pseudo = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pseudo-union");
  VadResult filtered = vad_filter(pseudo.manifest, VadConfig{});

  Manifest student = build_student_dataset(fx.labeled, filtered.manifest);
  CHECK(student.entries.size() == fx.labeled.entries.size() + filtered.manifest.entries.size());
  for (const auto& e : student.entries) {
    bool is_labeled = e.song_id.rfind("labeled/", 0) == 0;
    bool is_pseudo = e.song_id.rfind("pseudo/", 0) == 0;
    CHECK((is_labeled || is_pseudo));
    CHECK(e.provenance == (is_labeled ? "labeled" : "irm"));
    CHECK(std::filesystem::path(e.vocal).is_absolute());
    CHECK(std::filesystem::exists(e.vocal));
  }

  // duplicate ids across inputs are fine after namespacing
  Manifest clash = build_student_dataset(fx.labeled, fx.labeled);
  CHECK(clash.entries.size() == 2 * fx.labeled.entries.size());

  // empty filtered set -> union equals the labeled set
  Manifest none;
  Manifest only_labeled = build_student_dataset(fx.labeled, none);
  CHECK(only_labeled.entries.size() == fx.labeled.entries.size());
}

TEST_CASE("pipeline does not mutate input manifests") {
  SelfTrainFixture fx(2);
  Manifest unlabeled_before = fx.unlabeled;
  auto sep = make_identity_separator();
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "pure");
  VadResult filtered = vad_filter(res.manifest, VadConfig{});
  build_student_dataset(fx.labeled, filtered.manifest);
  CHECK(fx.unlabeled.entries.size() == unlabeled_before.entries.size());
  for (std::size_t i = 0; i < fx.unlabeled.entries.size(); ++i)
    CHECK(fx.unlabeled.entries[i].mixture == unlabeled_before.entries[i].mixture);
}

TEST_CASE("external separator runs a subprocess per song") {
  SelfTrainFixture fx(2, 6.0);
  // `cp in out_voc; cp in out_acc` behaves like the identity-ish separator
  auto sep = make_external_separator("sh -c 'cp \"$0\" \"$1\"; cp \"$0\" \"$2\"'");
  CHECK(!sep->thread_safe());
  PseudoLabelResult res = pseudo_label(fx.unlabeled, *sep, fx.dir.path() / "ext");
  CHECK(res.failures.empty());
  REQUIRE(res.manifest.entries.size() == 2);
  for (const auto& e : res.manifest.entries) {
    AudioSegment voc = load_wav(res.manifest.resolve(e.vocal));
    AudioSegment mix = load_wav(fx.unlabeled.resolve(fx.unlabeled.find(e.song_id)->mixture));
    CHECK(voc.samples == mix.samples);
  }

  auto failing = make_external_separator("false");
  PseudoLabelResult bad = pseudo_label(fx.unlabeled, *failing, fx.dir.path() / "ext-bad");
  CHECK(bad.manifest.entries.empty());
  CHECK(bad.failures.size() == 2);
}
