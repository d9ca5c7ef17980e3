#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "hok/config.hpp"
#include "hok/dataset.hpp"
#include "hok/pooling.hpp"
#include "hok/synth.hpp"

using namespace hok;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = std::filesystem::temp_directory_path() /
           ("hok_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter_++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
  static inline int counter_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(Dataset, SaveLoadRoundTripIsIdentity) {
  TempDir tmp;
  SynthSpec spec;
  spec.classes = 3;
  spec.sequences_per_class = 4;
  spec.min_length = 5;
  spec.max_length = 9;
  const Dataset ds = synth_generate(spec, 17);
  save_dataset(ds, tmp.path("data.jsonl"));
  const Dataset back = load_dataset(tmp.path("data.jsonl"));

  EXPECT_EQ(back.classes, ds.classes);
  EXPECT_EQ(back.dim, ds.dim);
  ASSERT_EQ(back.sequences.size(), ds.sequences.size());
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    EXPECT_EQ(back.sequences[i].id, ds.sequences[i].id);
    EXPECT_EQ(back.sequences[i].label, ds.sequences[i].label);
    EXPECT_TRUE(back.sequences[i].scores == ds.sequences[i].scores);  // bitwise
  }
}

TEST(Dataset, HandcraftedFixtureLoadsAsWritten) {
  TempDir tmp;
  const std::string fixture =
      R"({"classes": ["walk", "run"], "d": 3})"
      "\n"
      R"({"id": "a", "label": "walk", "scores": [[0.5, 0.25, 0.25], [0.1, 0.8, 0.1]]})"
      "\n"
      R"({"id": "b", "label": "run", "scores": [[0.2, 0.3, 0.5]]})"
      "\n"
      R"({"id": "c", "label": "walk", "scores": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]})"
      "\n";
  atomic_write(tmp.path("fixture.jsonl"), fixture);
  const Dataset ds = load_dataset(tmp.path("fixture.jsonl"));
  ASSERT_EQ(ds.sequences.size(), 3u);
  EXPECT_EQ(ds.dim, 3);
  EXPECT_EQ(ds.sequences[0].length(), 2);
  EXPECT_EQ(ds.sequences[1].length(), 1);
  EXPECT_EQ(ds.sequences[2].length(), 3);
  EXPECT_EQ(ds.sequences[0].label, 0);
  EXPECT_EQ(ds.sequences[1].label, 1);
  EXPECT_DOUBLE_EQ(ds.sequences[0].scores(1, 1), 0.8);
}

TEST(Dataset, EmptyBodyAfterHeaderLoadsEmpty) {
  TempDir tmp;
  atomic_write(tmp.path("empty.jsonl"), R"({"classes": ["a", "b"], "d": 2})" "\n");
  const Dataset ds = load_dataset(tmp.path("empty.jsonl"));
  EXPECT_TRUE(ds.sequences.empty());
  EXPECT_EQ(ds.dim, 2);
}

TEST(Dataset, MalformedLineReportsLineNumber) {
  TempDir tmp;
  atomic_write(tmp.path("bad.jsonl"),
               R"({"classes": ["a", "b"], "d": 2})" "\n"
               R"({"id": "x", "label": "a", "scores": [[0.5, 0.5]]})" "\n"
               "this is not json\n");
  try {
    load_dataset(tmp.path("bad.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, RejectsUnknownLabelAndSimplexViolation) {
  TempDir tmp;
  atomic_write(tmp.path("label.jsonl"),
               R"({"classes": ["a"], "d": 2})" "\n"
               R"({"id": "x", "label": "zz", "scores": [[0.5, 0.5]]})" "\n");
  EXPECT_THROW(load_dataset(tmp.path("label.jsonl")), ValidationError);

  atomic_write(tmp.path("simplex.jsonl"),
               R"({"classes": ["a", "b"], "d": 2})" "\n"
               R"({"id": "x", "label": "a", "scores": [[0.9, 0.6]]})" "\n");
  EXPECT_THROW(load_dataset(tmp.path("simplex.jsonl")), Error);

  EXPECT_THROW(load_dataset(tmp.path("does_not_exist.jsonl")), IoError);
}

TEST(Synth, NoiseZeroPutsFramesExactlyOnModes) {
  SynthSpec spec;
  spec.classes = 4;
  spec.sequences_per_class = 5;
  spec.min_length = 12;
  spec.max_length = 12;  // fixed length
  spec.noise = 0.0;
  spec.modes_per_class = 3;
  const Dataset ds = synth_generate(spec, 23);

  // at zero noise each class uses at most modes_per_class distinct frames
  for (int c = 0; c < spec.classes; ++c) {
    std::set<std::vector<double>> distinct;
    for (const auto& s : ds.sequences) {
      if (s.label != c) continue;
      for (int t = 0; t < s.length(); ++t) {
        std::vector<double> row(s.scores.row(t).begin(), s.scores.row(t).end());
        distinct.insert(std::move(row));
      }
    }
    EXPECT_LE(distinct.size(), static_cast<std::size_t>(spec.modes_per_class));
    EXPECT_GE(distinct.size(), 2u);
  }
}

TEST(Synth, ReversedPairsShareFrameMultisetsAtFixedLength) {
  SynthSpec spec;
  spec.classes = 2;
  spec.sequences_per_class = 6;
  spec.min_length = 15;
  spec.max_length = 15;
  spec.noise = 0.0;
  const Dataset ds = synth_generate(spec, 29);

  // same mode template traversed in reverse: per-class frame multisets match
  std::set<std::vector<double>> frames_fwd, frames_rev;
  Eigen::RowVectorXd mean_fwd = Eigen::RowVectorXd::Zero(ds.dim);
  Eigen::RowVectorXd mean_rev = Eigen::RowVectorXd::Zero(ds.dim);
  int n_fwd = 0, n_rev = 0;
  for (const auto& s : ds.sequences) {
    for (int t = 0; t < s.length(); ++t) {
      std::vector<double> row(s.scores.row(t).begin(), s.scores.row(t).end());
      if (s.label == 0) {
        frames_fwd.insert(row);
        mean_fwd += s.scores.row(t);
        ++n_fwd;
      } else {
        frames_rev.insert(row);
        mean_rev += s.scores.row(t);
        ++n_rev;
      }
    }
  }
  EXPECT_EQ(frames_fwd, frames_rev);
  mean_fwd /= n_fwd;
  mean_rev /= n_rev;
  EXPECT_LT((mean_fwd - mean_rev).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Synth, PairedClassesHaveMatchedAveragePoolsUnderNoise) {
  SynthSpec spec;
  spec.classes = 2;
  spec.sequences_per_class = 60;
  spec.min_length = 30;
  spec.max_length = 50;
  spec.noise = 0.25;
  const Dataset ds = synth_generate(spec, 31);

  Eigen::RowVectorXd mean0 = Eigen::RowVectorXd::Zero(ds.dim);
  Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(ds.dim);
  int c0 = 0, c1 = 0;
  for (const auto& s : ds.sequences) {
    const Descriptor d = average_pool(s);
    const Eigen::Map<const Eigen::RowVectorXd> v(d.values.data(),
                                                 static_cast<Eigen::Index>(d.values.size()));
    if (s.label == 0) {
      mean0 += v;
      ++c0;
    } else {
      mean1 += v;
      ++c1;
    }
  }
  mean0 /= c0;
  mean1 /= c1;
  // expectations are identical; the empirical gap is sampling noise only
  EXPECT_LT((mean0 - mean1).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Synth, DeterministicBytesUnderSeed) {
  SynthSpec spec;
  spec.classes = 3;
  spec.sequences_per_class = 4;
  spec.min_length = 6;
  spec.max_length = 10;
  TempDir tmp;
  save_dataset(synth_generate(spec, 123), tmp.path("a.jsonl"));
  save_dataset(synth_generate(spec, 123), tmp.path("b.jsonl"));
  save_dataset(synth_generate(spec, 124), tmp.path("c.jsonl"));
  EXPECT_EQ(slurp(tmp.path("a.jsonl")), slurp(tmp.path("b.jsonl")));
  EXPECT_NE(slurp(tmp.path("a.jsonl")), slurp(tmp.path("c.jsonl")));
}

TEST(Synth, ValidatesSpec) {
  SynthSpec spec;
  spec.classes = 1;
  EXPECT_THROW(synth_generate(spec, 0), InvalidParameterError);
  spec.classes = 4;
  spec.min_length = 10;
  spec.max_length = 5;
  EXPECT_THROW(synth_generate(spec, 0), InvalidParameterError);
  spec.max_length = 12;
  spec.noise = 1.5;
  EXPECT_THROW(synth_generate(spec, 0), InvalidParameterError);
}

TEST(Synth, SequencesPassValidation) {
  SynthSpec spec;
  spec.classes = 5;  // odd pair count exercises the unpaired last class
  spec.sequences_per_class = 3;
  spec.min_length = 5;
  spec.max_length = 20;
  spec.noise = 0.4;
  const Dataset ds = synth_generate(spec, 37);
  EXPECT_EQ(ds.sequences.size(), 15u);
  for (const auto& s : ds.sequences) EXPECT_NO_THROW(validate_sequence(s));
}

TEST(RunConfigJson, DefaultsRoundTrip) {
  const RunConfig defaults;
  const RunConfig parsed = parse_run_config(run_config_to_json(defaults));
  EXPECT_EQ(parsed.score_pivot_count, defaults.score_pivot_count);
  EXPECT_EQ(parsed.temporal_pivot_count, defaults.temporal_pivot_count);
  EXPECT_DOUBLE_EQ(parsed.hok.alpha, defaults.hok.alpha);
  EXPECT_EQ(parsed.folds, defaults.folds);
  EXPECT_EQ(parsed.seed, defaults.seed);

  const RunConfig empty = parse_run_config(nlohmann::json::object());
  EXPECT_EQ(empty.score_pivot_count, 48);
  EXPECT_EQ(empty.temporal_pivot_count, 5);
  EXPECT_DOUBLE_EQ(empty.sigma_t, 0.1);
  EXPECT_DOUBLE_EQ(empty.hok.alpha, 0.1);
  EXPECT_EQ(empty.hok.order, 3);
}

TEST(RunConfigJson, RejectsUnknownKeys) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"bogus": 1})")), ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"hok": {"r": 3, "typo": 2}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"pivots": {"kf": 8}})")),
               ValidationError);
}

TEST(RunConfigJson, RejectsOutOfRangeValues) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"hok": {"alpha": 0.0}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"hok": {"zeta1": 0.9, "zeta2": 0.9}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"eval": {"folds": 1}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"pivots": {"k_f": 0}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"classifier": {"epochs": 0}})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"hok": {"r": 9}})")),
               ValidationError);
}

TEST(RunConfigJson, BadTypeReported) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"seed": "abc"})")),
               ValidationError);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"descriptor": "sixth_order"})")),
               InvalidParameterError);
}

TEST(AtomicWrite, ReplacesContentAtomically) {
  TempDir tmp;
  const std::string p = tmp.path("file.txt");
  atomic_write(p, "first");
  atomic_write(p, "second");
  EXPECT_EQ(slurp(p), "second");
  EXPECT_FALSE(std::filesystem::exists(p + ".tmp"));
}
