#ifndef CHROMAMIX_SELFTRAIN_HPP
#define CHROMAMIX_SELFTRAIN_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chromamix/audio.hpp"
#include "chromamix/dataset.hpp"

namespace chromamix {

// Pluggable stand-in for the teacher/student models: anything that maps a
// mixture to (vocal estimate, accompaniment estimate) of the same length.
class Separator {
 public:
  virtual ~Separator() = default;
  virtual std::pair<AudioSegment, AudioSegment> separate(const AudioSegment& mixture) = 0;
  virtual std::string name() const = 0;
  // Implementations that cannot run concurrently return false and get a
  // serial lane from the orchestrator.
  virtual bool thread_safe() const { return true; }
};

// vocal = mixture, accompaniment = zeros.
std::unique_ptr<Separator> make_identity_separator();

// Ideal-ratio-mask oracle for one song: masks |V|/(|V|+|A|+1e-8) applied
// to the mixture STFT per bin.
std::unique_ptr<Separator> make_irm_separator(LoadedStems truth);

// IRM oracle resolving ground truth by the mixture's song_id.
std::unique_ptr<Separator> make_irm_manifest_separator(const Manifest& truth);

// Runs `command <mixture.wav> <vocal_out.wav> <accompaniment_out.wav>`
// as a subprocess per song.
std::unique_ptr<Separator> make_external_separator(std::string command);

struct PseudoLabelFailure {
  std::string song_id;
  std::string message;
};

struct PseudoLabelResult {
  Manifest manifest; // kind pseudo_labeled, provenance = separator name
  std::vector<PseudoLabelFailure> failures;
};

// Separates every mixture of an unlabeled manifest, writing estimated
// stems under out_dir. Per-song failures are recorded and skipped.
PseudoLabelResult pseudo_label(const Manifest& unlabeled, Separator& separator,
                               const std::filesystem::path& out_dir);

struct VadConfig {
  double frame_s = 0.03;
  double rms_threshold = 0.01;
  double min_voiced_fraction = 0.1; // in (0, 1]
};

struct VadResult {
  Manifest manifest;
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

// Frame-RMS energy voice activity filter: keeps entries whose estimated
// vocal stem is voiced in at least min_voiced_fraction of frames.
VadResult vad_filter(const Manifest& pseudo, const VadConfig& config);

// Union of a labeled manifest and a filtered pseudo-labeled manifest with
// namespaced song ids ("labeled/", "pseudo/") and provenance flags.
Manifest build_student_dataset(const Manifest& labeled, const Manifest& filtered);

} // namespace chromamix

#endif
