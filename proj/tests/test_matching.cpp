#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "chromamix/errors.hpp"
#include "chromamix/matching.hpp"
#include "test_support.hpp"

using namespace chromamix;
using namespace chromamix::test;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ChromaVector one_hot(int cls, double value = 1.0) {
  ChromaVector v;
  v.values[static_cast<std::size_t>(cls)] = value;
  return v;
}

// High-precision softmax oracle for two scores.
long double two_score_p0(long double s0, long double s1, long double temp) {
  return 1.0L / (1.0L + std::exp((s1 - s0) / temp));
}

} // namespace

TEST_CASE("match_score basics") {
  ChromaVector a = one_hot(0, 2.0);
  CHECK(match_score(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(match_score(one_hot(0), one_hot(9)) == 0.0);

  ChromaVector zero;
  CHECK(match_score(zero, a) == 0.0);
  CHECK(match_score(zero, zero) == 0.0);
}

TEST_CASE("match_score symmetry and scale invariance") {
  RandomStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    ChromaVector a, b;
    for (int c = 0; c < 12; ++c) {
      a.values[static_cast<std::size_t>(c)] = rng.next_double();
      b.values[static_cast<std::size_t>(c)] = rng.next_double();
    }
    double ab = match_score(a, b);
    double ba = match_score(b, a);
    CHECK(ab == ba); // exact

    ChromaVector a2 = a, b2 = b;
    for (int c = 0; c < 12; ++c) {
      a2.values[static_cast<std::size_t>(c)] *= 3.7;
      b2.values[static_cast<std::size_t>(c)] *= 0.9;
    }
    CHECK(std::abs(match_score(a2, b2) - ab) < 1e-12);
  }
}

TEST_CASE("softmax at the paper's operating points") {
  const double scores[2] = {0.98, 0.88};

  auto p1 = softmax_probs(scores, 1.0);
  CHECK(p1[0] == doctest::Approx(static_cast<double>(two_score_p0(0.98L, 0.88L, 1.0L))).epsilon(1e-12));
  CHECK(p1[0] == doctest::Approx(0.52498).epsilon(2e-5));
  CHECK(p1[1] == doctest::Approx(0.47502).epsilon(2e-5));

  auto p033 = softmax_probs(scores, 0.33);
  CHECK(p033[0] ==
        doctest::Approx(static_cast<double>(two_score_p0(0.98L, 0.88L, 0.33L))).epsilon(1e-12));
  CHECK(p033[0] == doctest::Approx(0.57518).epsilon(2e-5));
  CHECK(p033[1] == doctest::Approx(0.42482).epsilon(2e-5));
}

TEST_CASE("softmax limits and symmetry") {
  const double equal[3] = {0.5, 0.5, 0.5};
  for (double p : softmax_probs(equal, 1.0)) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const double two[2] = {0.98, 0.88};
  auto zero_t = softmax_probs(two, 0.0);
  CHECK(zero_t[0] == 1.0);
  CHECK(zero_t[1] == 0.0);

  const double tie[4] = {0.2, 0.9, 0.9, 0.1};
  auto tied = softmax_probs(tie, 0.0);
  CHECK(tied[1] == 1.0); // lowest index wins ties

  auto inf_t = softmax_probs(two, kInf);
  CHECK(inf_t[0] == 0.5);
  CHECK(inf_t[1] == 0.5);
}

TEST_CASE("softmax probabilities sum to one") {
  RandomStream rng(77);
  for (double temp : {0.05, 0.33, 1.0, 3.0, 50.0}) {
    std::vector<double> scores(8);
    for (auto& s : scores) s = 2.0 * rng.next_double() - 1.0;
    auto probs = softmax_probs(scores, temp);
    double sum = 0.0;
    for (double p : probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("softmax shift invariance") {
  const double scores[4] = {0.1, -0.4, 0.9, 0.3};
  auto base = softmax_probs(scores, 0.7);
  double shifted_scores[4];
  for (int i = 0; i < 4; ++i) shifted_scores[i] = scores[i] + 123.25;
  auto shifted = softmax_probs(shifted_scores, 0.7);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(base[i] - shifted[i]) < 1e-12);
}

TEST_CASE("softmax monotonicity and temperature concentration") {
  const double scores[5] = {0.9, 0.2, 0.5, -0.3, 0.85};
  double prev_top = 0.0;
  for (double temp : {3.0, 1.0, 0.33}) {
    auto probs = softmax_probs(scores, temp);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (scores[i] > scores[j]) CHECK(probs[i] > probs[j]);
    CHECK(probs[0] >= prev_top); // mass on the argmax grows as T falls
    prev_top = probs[0];
  }
}

TEST_CASE("softmax errors") {
  CHECK_THROWS_AS(softmax_probs(std::span<const double>{}, 1.0), Error);
  const double bad[2] = {0.5, std::nan("")};
  CHECK_THROWS_AS(softmax_probs(bad, 1.0), Error);
  const double fine[2] = {0.5, 0.1};
  CHECK_THROWS_AS(softmax_probs(fine, -1.0), Error);
}

TEST_CASE("sample_partner on synthesized stems") {
  MatchConfig config;
  config.mode = MatchMode::acc2acc;
  config.temperature = 0.0;
  config.segment_s = 0.5;

  AudioSegment anchor = make_tone(440.0, 0.5);
  anchor.stem = StemRole::accompaniment;
  anchor.song_id = "anchor";

  std::vector<AudioSegment> candidates;
  for (double freq : {523.251, 440.0, 329.628}) { // C5, A4, E4
    AudioSegment c = make_tone(freq, 0.5);
    c.stem = StemRole::accompaniment;
    c.song_id = "c" + std::to_string(static_cast<int>(freq));
    candidates.push_back(std::move(c));
  }

  RandomStream rng(42, 1);
  SampleResult res = sample_partner(anchor, candidates, config, rng);
  CHECK(res.chosen == 1); // the matching A4 candidate wins at T = 0
  CHECK(res.scored.size() == 3);
  CHECK(res.scored[1].score == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.scored[1].chosen);
  CHECK(res.scored[0].probability == 0.0);

  double psum = 0.0;
  for (const auto& sc : res.scored) psum += sc.probability;
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sample_partner single candidate is always chosen") {
  MatchConfig config;
  config.mode = MatchMode::voc2voc;
  config.temperature = 3.0;

  AudioSegment anchor = make_tone(330.0, 0.2);
  anchor.stem = StemRole::vocal;
  std::vector<AudioSegment> candidates{make_tone(550.0, 0.2)};
  candidates[0].stem = StemRole::vocal;

  RandomStream rng(1, 2);
  CHECK(sample_partner(anchor, candidates, config, rng).chosen == 0);
}

TEST_CASE("sample_partner enforces stem roles") {
  MatchConfig config;
  config.mode = MatchMode::acc2acc;
  AudioSegment anchor = make_tone(440.0, 0.2);
  anchor.stem = StemRole::vocal; // wrong for acc2acc
  std::vector<AudioSegment> candidates{make_tone(440.0, 0.2)};
  candidates[0].stem = StemRole::accompaniment;
  RandomStream rng(1, 3);
  try {
    sample_partner(anchor, candidates, config, rng);
    FAIL("expected mode error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::mode);
  }
}

TEST_CASE("uniform draws concentrate at 1/n") {
  const std::vector<double> probs(8, 0.125);
  std::map<std::size_t, int> counts;
  RandomStream rng(42, 9);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ++counts[draw_categorical(probs, rng)];
  for (const auto& [idx, count] : counts) {
    CHECK(idx < 8);
    CHECK(std::abs(count / static_cast<double>(draws) - 0.125) < 0.01);
  }
}

TEST_CASE("seeded draws replay identically") {
  const std::vector<double> probs{0.3, 0.5, 0.2};
  RandomStream a(7, 4), b(7, 4);
  for (int i = 0; i < 200; ++i) CHECK(draw_categorical(probs, a) == draw_categorical(probs, b));
}
