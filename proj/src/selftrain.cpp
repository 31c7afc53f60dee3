#include "chromamix/selftrain.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <set>

#include "chromamix/errors.hpp"
#include "chromamix/stft.hpp"
#include "chromamix/wav.hpp"

namespace chromamix {

namespace {

class IdentitySeparator : public Separator {
 public:
  std::pair<AudioSegment, AudioSegment> separate(const AudioSegment& mixture) override {
    AudioSegment vocal = mixture;
    vocal.stem = StemRole::vocal;
    AudioSegment acc;
    acc.samples.assign(mixture.samples.size(), 0.0f);
    acc.sample_rate = mixture.sample_rate;
    acc.song_id = mixture.song_id;
    acc.stem = StemRole::accompaniment;
    acc.offset_s = mixture.offset_s;
    return {std::move(vocal), std::move(acc)};
  }
  std::string name() const override { return "identity"; }
};

constexpr double kIrmEpsilon = 1e-8;

std::pair<AudioSegment, AudioSegment> irm_separate(const LoadedStems& truth,
                                                   const AudioSegment& mixture) {
  const std::size_t n = mixture.samples.size();
  if (truth.num_samples() < n)
    raise(ErrorKind::shape, "ground-truth stems shorter than mixture for '" +
                                mixture.song_id + "'");
  AudioSegment voc_ref = truth.vocal;
  AudioSegment acc_ref = truth.accompaniment;
  voc_ref.samples.resize(n);
  acc_ref.samples.resize(n);

  Spectrogram mix_spec = stft(mixture);
  Spectrogram voc_spec = stft(voc_ref);
  Spectrogram acc_spec = stft(acc_ref);

  Spectrogram voc_out = mix_spec;
  Spectrogram acc_out = mix_spec;
  for (std::size_t i = 0; i < mix_spec.data.size(); ++i) {
    double v = std::abs(voc_spec.data[i]);
    double a = std::abs(acc_spec.data[i]);
    double denom = v + a + kIrmEpsilon;
    voc_out.data[i] = mix_spec.data[i] * (v / denom);
    acc_out.data[i] = mix_spec.data[i] * (a / denom);
  }

  AudioSegment voc_est = istft(voc_out, n);
  AudioSegment acc_est = istft(acc_out, n);
  voc_est.song_id = mixture.song_id;
  acc_est.song_id = mixture.song_id;
  voc_est.stem = StemRole::vocal;
  acc_est.stem = StemRole::accompaniment;
  voc_est.offset_s = mixture.offset_s;
  acc_est.offset_s = mixture.offset_s;
  return {std::move(voc_est), std::move(acc_est)};
}

class IrmSeparator : public Separator {
 public:
  explicit IrmSeparator(LoadedStems truth) : truth_(std::move(truth)) {}
  std::pair<AudioSegment, AudioSegment> separate(const AudioSegment& mixture) override {
    return irm_separate(truth_, mixture);
  }
  std::string name() const override { return "irm"; }

 private:
  LoadedStems truth_;
};

class IrmManifestSeparator : public Separator {
 public:
  explicit IrmManifestSeparator(const Manifest& truth) : truth_(&truth) {}
  std::pair<AudioSegment, AudioSegment> separate(const AudioSegment& mixture) override {
    const ManifestEntry* entry = truth_->find(mixture.song_id);
    if (!entry)
      raise(ErrorKind::validation,
            "no ground truth for song '" + mixture.song_id + "' in truth manifest");
    return irm_separate(load_stems(*truth_, *entry), mixture);
  }
  std::string name() const override { return "irm"; }

 private:
  const Manifest* truth_;
};

class ExternalSeparator : public Separator {
 public:
  explicit ExternalSeparator(std::string command) : command_(std::move(command)) {}

  std::pair<AudioSegment, AudioSegment> separate(const AudioSegment& mixture) override {
    auto dir = std::filesystem::temp_directory_path() /
               ("chromamix-sep-" + std::to_string(counter_++));
    std::filesystem::create_directories(dir);
    auto in = dir / "mixture.wav";
    auto out_voc = dir / "vocal.wav";
    auto out_acc = dir / "accompaniment.wav";
    save_wav(mixture, in);
    std::string cmd =
        command_ + " '" + in.string() + "' '" + out_voc.string() + "' '" + out_acc.string() + "'";
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
      std::filesystem::remove_all(dir);
      raise(ErrorKind::io, "external separator failed (exit " + std::to_string(rc) + ")");
    }
    AudioSegment voc = load_wav(out_voc);
    AudioSegment acc = load_wav(out_acc);
    std::filesystem::remove_all(dir);
    if (voc.samples.size() != mixture.samples.size() ||
        acc.samples.size() != mixture.samples.size())
      raise(ErrorKind::shape, "external separator changed the sample count");
    voc.song_id = mixture.song_id;
    acc.song_id = mixture.song_id;
    voc.stem = StemRole::vocal;
    acc.stem = StemRole::accompaniment;
    return {std::move(voc), std::move(acc)};
  }

  std::string name() const override { return "extern"; }
  bool thread_safe() const override { return false; }

 private:
  std::string command_;
  std::atomic<std::uint64_t> counter_{0};
};

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return out;
}

} // namespace

std::unique_ptr<Separator> make_identity_separator() {
  return std::make_unique<IdentitySeparator>();
}

std::unique_ptr<Separator> make_irm_separator(LoadedStems truth) {
  return std::make_unique<IrmSeparator>(std::move(truth));
}

std::unique_ptr<Separator> make_irm_manifest_separator(const Manifest& truth) {
  return std::make_unique<IrmManifestSeparator>(truth);
}

std::unique_ptr<Separator> make_external_separator(std::string command) {
  return std::make_unique<ExternalSeparator>(std::move(command));
}

PseudoLabelResult pseudo_label(const Manifest& unlabeled, Separator& separator,
                               const std::filesystem::path& out_dir) {
  for (const auto& e : unlabeled.entries)
    if (e.mixture.empty())
      raise(ErrorKind::validation, "entry '" + e.song_id + "' has no mixture to separate");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  const std::size_t n = unlabeled.entries.size();
  std::vector<ManifestEntry> produced(n);
  std::vector<std::string> errors(n);

  auto process_one = [&](std::size_t i) {
    const auto& src = unlabeled.entries[i];
    try {
      AudioSegment mixture = load_wav(unlabeled.resolve(src.mixture));
      mixture.song_id = src.song_id;
      auto [voc, acc] = separator.separate(mixture);
      std::string base = sanitize_id(src.song_id);
      save_wav(voc, out_dir / (base + "_vocal.wav"));
      save_wav(acc, out_dir / (base + "_accompaniment.wav"));

      ManifestEntry e;
      e.song_id = src.song_id;
      e.vocal = base + "_vocal.wav";
      e.accompaniment = base + "_accompaniment.wav";
      e.mixture = std::filesystem::absolute(unlabeled.resolve(src.mixture)).string();
      e.duration_s = src.duration_s;
      e.provenance = separator.name();
      produced[i] = std::move(e);
    } catch (const Error& err) {
      errors[i] = err.what();
    }
  };

  if (separator.thread_safe()) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
      process_one(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) process_one(i);
  }

  PseudoLabelResult result;
  result.manifest.dataset_name = unlabeled.dataset_name;
  result.manifest.kind = ManifestKind::pseudo_labeled;
  result.manifest.base_dir = out_dir;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty())
      result.failures.push_back({unlabeled.entries[i].song_id, errors[i]});
    else
      result.manifest.entries.push_back(std::move(produced[i]));
  }
  return result;
}

VadResult vad_filter(const Manifest& pseudo, const VadConfig& config) {
  if (config.frame_s <= 0.0 || config.rms_threshold <= 0.0)
    raise(ErrorKind::parameter, "VAD frame and threshold must be positive");
  if (config.min_voiced_fraction <= 0.0 || config.min_voiced_fraction > 1.0)
    raise(ErrorKind::parameter, "min_voiced_fraction must be in (0, 1]");

  const auto frame_len = static_cast<std::size_t>(std::llround(config.frame_s * kSampleRate));
  VadResult result;
  result.manifest.dataset_name = pseudo.dataset_name;
  result.manifest.kind = pseudo.kind;
  result.manifest.base_dir = pseudo.base_dir;

  for (const auto& e : pseudo.entries) {
    if (e.vocal.empty())
      raise(ErrorKind::validation, "entry '" + e.song_id + "' has no vocal estimate");
    AudioSegment voc = load_wav(pseudo.resolve(e.vocal));
    const std::size_t num_frames = voc.samples.size() / frame_len;
    std::size_t voiced = 0;
    for (std::size_t f = 0; f < num_frames; ++f) {
      double energy = 0.0;
      for (std::size_t i = 0; i < frame_len; ++i) {
        double v = voc.samples[f * frame_len + i];
        energy += v * v;
      }
      if (std::sqrt(energy / static_cast<double>(frame_len)) >= config.rms_threshold) ++voiced;
    }
    const double fraction =
        num_frames > 0 ? static_cast<double>(voiced) / static_cast<double>(num_frames) : 0.0;
    if (fraction >= config.min_voiced_fraction) {
      result.manifest.entries.push_back(e);
      ++result.kept;
    } else {
      ++result.dropped;
    }
  }
  return result;
}

Manifest build_student_dataset(const Manifest& labeled, const Manifest& filtered) {
  Manifest out;
  out.dataset_name = labeled.dataset_name.empty() ? "student" : labeled.dataset_name + "+pseudo";
  out.kind = ManifestKind::labeled;

  std::set<std::string> ids;
  auto add = [&](const Manifest& src, const ManifestEntry& e, const std::string& ns,
                 const std::string& default_provenance) {
    ManifestEntry copy = e;
    copy.song_id = ns + "/" + e.song_id;
    if (!ids.insert(copy.song_id).second)
      raise(ErrorKind::validation, "song_id collision after namespacing: " + copy.song_id);
    // Absolute paths: the union manifest has no single base directory.
    if (!copy.vocal.empty())
      copy.vocal = std::filesystem::absolute(src.resolve(copy.vocal)).string();
    if (!copy.accompaniment.empty())
      copy.accompaniment = std::filesystem::absolute(src.resolve(copy.accompaniment)).string();
    if (!copy.mixture.empty())
      copy.mixture = std::filesystem::absolute(src.resolve(copy.mixture)).string();
    if (copy.provenance.empty()) copy.provenance = default_provenance;
    out.entries.push_back(std::move(copy));
  };

  for (const auto& e : labeled.entries) add(labeled, e, "labeled", "labeled");
  for (const auto& e : filtered.entries) add(filtered, e, "pseudo", "pseudo");
  return out;
}

} // namespace chromamix
