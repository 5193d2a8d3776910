// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance                  run criteria 1-10
//   acceptance --criterion 8    run one criterion
//   acceptance --out DIR        where the end-to-end runs write their files

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brightsynth/autolabel.h"
#include "brightsynth/dataset_mix.h"
#include "brightsynth/denoiser_train.h"
#include "brightsynth/detector.h"
#include "brightsynth/diffusion.h"
#include "brightsynth/errors.h"
#include "brightsynth/eval_map.h"
#include "brightsynth/fid.h"
#include "brightsynth/nn/ops.h"
#include "brightsynth/phantom.h"
#include "brightsynth/pipeline.h"
#include "brightsynth/rng.h"
#include "brightsynth/runtime.h"
#include "brightsynth/survey.h"
#include "brightsynth/unet.h"
#include "oracles.h"

namespace brightsynth {
namespace {

namespace fs = std::filesystem;
using nn::ParamSet;
using nn::Shape;
using nn::Tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---- 1: samplers against a Gaussian prior -----------------------------------

// Closed-form epsilon estimate for a N(mu, s0^2) prior with its own copy of
// the linear schedule.
class OracleDenoiser : public Denoiser {
 public:
  OracleDenoiser(double mu, double s0) : mu_(mu), s0_(s0) {
    double prod = 1.0;
    for (int i = 0; i < 1000; ++i) {
      prod *= 1.0 - (1e-4 + i * (0.02 - 1e-4) / 999.0);
      ab_.push_back(prod);
    }
  }
  Tensor PredictEpsilon(const Tensor& x, const std::vector<int>& t) const override {
    Tensor out(x.shape);
    const size_t per = x.size() / x.shape.n;
    for (size_t i = 0; i < x.size(); ++i) {
      const double ab = ab_[t[i / per]];
      out[i] = (x[i] - std::sqrt(ab) * mu_) * std::sqrt(1.0 - ab) / (ab * s0_ * s0_ + 1.0 - ab);
    }
    return out;
  }

 private:
  double mu_;
  double s0_;
  std::vector<double> ab_;
};

std::pair<double, double> MeanStd(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data) m += v;
  m /= t.size();
  double var = 0.0;
  for (double v : t.data) var += (v - m) * (v - m);
  return {m, std::sqrt(var / (t.size() - 1))};
}

Outcome SamplerOracle() {
  const auto start = std::chrono::steady_clock::now();
  const OracleDenoiser oracle(0.3, 0.2);
  const NoiseSchedule schedule = MakeSchedule(1000, 1e-4, 0.02);
  SamplerConfig ddim;
  ddim.kind = SamplerKind::kDdim;
  ddim.steps = 40;
  ddim.eta = 0.0;
  ddim.spacing = Spacing::kTrailing;
  ddim.clamp_output = false;
  SamplerConfig ea = ddim;
  ea.kind = SamplerKind::kEulerAncestral;
  const Shape shape{1, 1, 100, 100};
  const auto [dm, ds] = MeanStd(Sample(oracle, ddim, schedule, shape, 1));
  const auto [em, es] = MeanStd(Sample(oracle, ea, schedule, shape, 2));
  const double secs = Seconds(start);
  const bool ok = std::abs(dm - 0.3) <= 0.01 && std::abs(ds - 0.2) <= 0.01 &&
                  std::abs(em - 0.3) <= 0.02 && std::abs(es - 0.2) <= 0.02 && secs < 60.0;
  return {ok, Fmt("ddim mean %.4f std %.4f; euler_a mean %.4f std %.4f", dm, ds, em, es) +
                  Fmt("; %.1fs", secs)};
}

// ---- 2: algebraic step identities --------------------------------------------

Outcome StepIdentities() {
  Rng rng(3);
  double worst_ddim = 0.0;
  double worst_ea = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Tensor x({2, 1, 4, 4}), eps({2, 1, 4, 4}), z({2, 1, 4, 4});
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.Normal();
      eps[i] = rng.Normal();
      z[i] = rng.Normal();
    }
    const double ab = rng.Uniform(1e-4, 0.9999);
    const Tensor same = DdimStep(x, eps, ab, ab, 0.0);
    const double sigma = rng.Uniform(0.01, 80.0);
    const Tensor last = EulerAncestralStep(x, eps, sigma, 0.0, z);
    for (size_t i = 0; i < x.size(); ++i) {
      worst_ddim = std::max(worst_ddim, std::abs(same[i] - x[i]));
      worst_ea = std::max(worst_ea, std::abs(last[i] - eps[i]));
    }
  }
  return {worst_ddim <= 1e-6 && worst_ea <= 1e-6,
          Fmt("max |ddim(ab,ab) - x| %.2e; max |ea(sigma_next=0) - denoised| %.2e", worst_ddim,
              worst_ea)};
}

// ---- 3: finite-difference gradients -----------------------------------------

struct GradCheck {
  double worst = 0.0;
  std::string worst_name;
  int layers = 0;
  bool dead_layer = false;
};

void Compare(const ParamSet& params, const ParamSet& analytic, const ParamSet& numeric,
             GradCheck& out) {
  for (size_t e = 0; e < params.entries().size(); ++e) {
    const Tensor& a = analytic.at(params.entries()[e].first);
    const Tensor& n = numeric.entries()[e].second;
    double magnitude = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double r = oracle::RelativeError(a[i], n[i], 1e-4);
      if (r > out.worst) {
        out.worst = r;
        out.worst_name = params.entries()[e].first;
      }
      magnitude = std::max(magnitude, std::abs(n[i]));
    }
    out.dead_layer |= magnitude == 0.0;
    ++out.layers;
  }
}

void Activate(ParamSet& p, uint64_t seed) {
  Rng rng(seed);
  for (auto& [name, t] : p.entries()) {
    bool zero = true;
    for (double v : t.data) zero = zero && v == 0.0;
    if (zero) {
      for (double& v : t.data) v = 0.2 * rng.Normal();
    }
  }
}

double DetectorLoss(const DetectorModel& m, const Tensor& x, const HeatmapTargets& tgt,
                    ParamSet* grads) {
  nn::Tape tape;
  DetectorVars v = DetectorForward(tape, m, tape.Constant(x));
  const double norm = std::max(1, tgt.num_pos);
  nn::Var loss = nn::FocalLoss(tape, v.heat_logits, tgt.heatmap, norm);
  loss = nn::Add(tape, loss,
                 nn::Scale(tape, nn::MaskedL1(tape, v.size, tgt.size, tgt.mask, norm), 0.1));
  loss = nn::Add(tape, loss, nn::MaskedL1(tape, v.offset, tgt.offset, tgt.mask, norm));
  if (grads != nullptr) {
    tape.Backward(loss);
    tape.AccumulateParamGrads(*grads);
  }
  return tape.value(loss).data[0];
}

Outcome FiniteDifferences() {
  const auto start = std::chrono::steady_clock::now();
  GradCheck check;
  Rng rng(11);

  UNetConfig uc;
  uc.block_channels = {2, 3};
  uc.time_embed_dim = 4;
  ParamSet up = InitUNet(uc, 5);
  Activate(up, 6);
  TrainBatch batch{Tensor({2, 1, 4, 4}), Tensor({2, 1, 4, 4}), {30, 700}};
  for (size_t i = 0; i < batch.x0.size(); ++i) {
    batch.x0[i] = 0.5 * rng.Normal();
    batch.noise[i] = rng.Normal();
  }
  const NoiseSchedule s = MakeSchedule();
  const GradResult ug = DenoiserGrad(up, uc, batch, s);
  const ParamSet un = oracle::NumericGrad(up, [&] { return DenoiserGrad(up, uc, batch, s).loss; },
                                          1e-5);
  Compare(up, ug.grads, un, check);

  DetectorConfig dc;
  dc.stride = 2;
  dc.channels = {2, 3};
  DetectorModel dm = InitDetector(dc, 7);
  Activate(dm.params, 8);
  Tensor x({1, 1, 8, 8});
  for (double& v : x.data) v = rng.Uniform();
  const HeatmapTargets tgt = EncodeTargets({{1.3, 2.1, 3.4, 2.7, std::nullopt}}, 8, 8, 2);
  ParamSet dg = dm.params.ZerosLike();
  DetectorLoss(dm, x, tgt, &dg);
  const ParamSet dn =
      oracle::NumericGrad(dm.params, [&] { return DetectorLoss(dm, x, tgt, nullptr); }, 1e-6);
  Compare(dm.params, dg, dn, check);

  const double secs = Seconds(start);
  return {check.worst <= 1e-3 && !check.dead_layer && secs < 60.0,
          Fmt("%.0f tensors; worst relative error %.2e", check.layers, check.worst) + " (" +
              check.worst_name + ")" + (check.dead_layer ? "; a tensor had zero gradient" : "") +
              Fmt("; %.1fs", secs)};
}

// ---- 4: Frechet distance -----------------------------------------------------

FeatureStats OneD(double mu, double var) {
  FeatureStats s;
  s.mu = Eigen::VectorXd::Constant(1, mu);
  s.sigma = Eigen::MatrixXd::Constant(1, 1, var);
  s.n = 2;
  return s;
}

Outcome FrechetChecks() {
  std::vector<Image> imgs;
  for (int i = 0; i < 24; ++i) imgs.push_back(GenerateSample(DeskPhantomConfig(), 40 + i).brightfield);
  std::vector<Image> other;
  for (int i = 0; i < 24; ++i) other.push_back(GenerateSample(DeskPhantomConfig(), 90 + i).brightfield);
  const FeatureStats a = GaussianStats(imgs);
  const FeatureStats b = GaussianStats(other);
  const double self = FrechetDistance(a, a);
  const double shift = FrechetDistance(OneD(0, 1), OneD(1, 1));
  const double scale = FrechetDistance(OneD(0, 1), OneD(0, 4));
  const double asym = std::abs(FrechetDistance(a, b) - FrechetDistance(b, a));
  const bool ok = std::abs(self) <= 1e-6 && std::abs(shift - 1.0) <= 1e-6 &&
                  std::abs(scale - 1.0) <= 1e-6 && asym <= 1e-6;
  return {ok, Fmt("self %.2e; shift %.8f; scale %.8f; |d(a,b)-d(b,a)| %.2e", self, shift, scale,
                  asym)};
}

// ---- 5: mAP against the brute-force evaluator --------------------------------

std::pair<BoxesById, BoxesById> RandomInstance(Rng& rng) {
  BoxesById preds, gts;
  auto box = [&] {
    return BBox{static_cast<double>(rng.UniformInt(0, 40)), static_cast<double>(rng.UniformInt(0, 40)),
                static_cast<double>(rng.UniformInt(2, 12)), static_cast<double>(rng.UniformInt(2, 12)),
                std::nullopt};
  };
  const int images = static_cast<int>(rng.UniformInt(1, 20));
  for (int i = 0; i < images; ++i) {
    const std::string id = "img" + std::to_string(i);
    auto& g = gts[id];
    auto& p = preds[id];
    const int ng = static_cast<int>(rng.UniformInt(0, 8));
    for (int k = 0; k < ng; ++k) g.push_back(box());
    const int np = static_cast<int>(rng.UniformInt(0, 8));
    for (int k = 0; k < np; ++k) {
      BBox b = box();
      if (!g.empty() && rng.Uniform() < 0.7) {
        b = g[static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(g.size()) - 1))];
        b.x += rng.UniformInt(-2, 2);
        b.y += rng.UniformInt(-2, 2);
        b.w = std::max(1.0, b.w + rng.UniformInt(-2, 2));
        b.h = std::max(1.0, b.h + rng.UniformInt(-2, 2));
      }
      b.score = static_cast<double>(rng.UniformInt(1, 10)) / 10.0;
      p.push_back(b);
    }
  }
  return {preds, gts};
}

Outcome MapOracle() {
  Rng rng(424242);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto [preds, gts] = RandomInstance(rng);
    const EvalResult r = MapSuite(preds, gts);
    const oracle::BruteForceResult o = oracle::BruteForceMap(preds, gts);
    mismatches += !(r.ap == o.ap && r.map50 == o.map50 && r.map75 == o.map75 &&
                    r.map5095 == o.map5095);
  }
  const double traced = AveragePrecision({true, false, true}, 2);
  return {mismatches == 0 && std::abs(traced - 0.8350) <= 1e-4,
          Fmt("%.0f/200 instances differ from brute force; AP[TP,FP,TP] = %.4f", mismatches,
              traced)};
}

// ---- 6: dataset mixing ------------------------------------------------------

Outcome MixArithmetic() {
  std::vector<ManifestRecord> real, synth;
  for (int i = 0; i < 5600; ++i)
    real.push_back({"/r/" + std::to_string(i) + ".pgm", Source::kReal, Split::kPool, {}});
  for (int i = 0; i < 2600; ++i)
    synth.push_back({"/s/" + std::to_string(i) + ".pgm", Source::kSynthetic, Split::kPool, {}});
  const DatasetManifest base = SplitDataset({"real", 0, real}, 5000, 250, 350, 3);
  const auto sets = BuildExperimentDatasets(base, synth, 9);
  const ManifestCounts rep = sets[2].Counts();  // scc_30
  const ManifestCounts add = sets[5].Counts();  // scc_add_30
  bool identical = sets.size() == 7;
  for (const auto& m : sets) {
    for (Split s : {Split::kVal, Split::kTest}) {
      identical &= SerializeSplit(m, s, "/") == SerializeSplit(base, s, "/");
    }
  }
  const bool ok = rep.train_real == 3500 && rep.train_synthetic == 1500 && rep.train() == 5000 &&
                  add.train_real == 5000 && add.train() == 6500 && identical;
  return {ok, Fmt("scc_30 %.0f real + %.0f synthetic; scc_add_30 %.0f train; ", rep.train_real,
                  rep.train_synthetic, add.train()) +
                  (identical ? "val/test identical across 7" : "val/test differ")};
}

// ---- 7: auto-label fidelity --------------------------------------------------

Outcome AutolabelFidelity() {
  PhantomConfig c;
  c.overlap_allowed = false;
  int count_ok = 0;
  int boxes = 0;
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const PhantomSample s = GenerateSample(c, DeriveSeed(2026, i));
    const auto found = AutolabelFluorescence(s.fluorescence);
    count_ok += found.size() == s.boxes.size();
    // Greedy one-to-one matching by IoU.
    std::vector<bool> used(found.size(), false);
    for (const BBox& g : s.boxes) {
      int best = -1;
      double best_iou = 0.0;
      for (size_t k = 0; k < found.size(); ++k) {
        const double v = Iou(found[k], g);
        if (!used[k] && v > best_iou) {
          best_iou = v;
          best = static_cast<int>(k);
        }
      }
      if (best >= 0) used[static_cast<size_t>(best)] = true;
      worst = std::min(worst, best_iou);
      ++boxes;
    }
  }
  return {count_ok >= 99 && worst >= 0.8,
          Fmt("count exact on %.0f/100 images; worst IoU %.3f over %.0f boxes", count_ok, worst,
              boxes)};
}

// ---- 8: end-to-end desk experiment ------------------------------------------

Outcome DeskExperiment(const fs::path& out) {
  fs::remove_all(out);
  const IniConfig ini = IniConfig::Load(fs::path(BRIGHTSYNTH_SOURCE_DIR) / "configs/desk.ini");
  const DeskExperimentConfig config = DeskExperimentConfigFrom(ini);
  const DeskExperimentResult r = RunDeskExperiment(config, out, [](const std::string& line) {
    std::fprintf(stderr, "%s\n", line.c_str());
  });
  WriteTextFile(out / "report.txt", r.table);
  bool steps_ok = !r.sample.batch_steps.empty();
  for (int s : r.sample.batch_steps) steps_ok &= s >= 35 && s <= 40;
  int cells = 0;
  double real = -1.0, add30 = -1.0;
  for (const auto& [name, m] : r.metrics) {
    for (double v : {m.map50, m.map75, m.map5095}) cells += std::isfinite(v) && v >= 0.0 && v <= 1.0;
    if (name == "scc_real") real = m.map50;
    if (name == "scc_add_30") add30 = m.map50;
  }
  const double initial = r.diffusion.train.initial_fid;
  const double selected = r.diffusion.selected_fid;
  const bool ok = config.train_n == 500 && config.val_n == 200 && config.test_n == 300 &&
                  r.diffusion_seconds <= 1800.0 && selected < initial &&
                  r.sample.synthetic.records.size() == 250 && steps_ok && r.datasets.size() == 7 &&
                  cells == 21 && real >= 0.70 && std::abs(add30 - real) <= 0.10;
  std::fputs(r.table.c_str(), stderr);
  return {ok, Fmt("train %.0fs; fid %.4f -> %.4f; ", r.diffusion_seconds, initial, selected) +
                  Fmt("%.0f synthetic; %.0f/21 cells; scc_real mAP@50 %.4f; scc_add_30 %.4f",
                      r.sample.synthetic.records.size(), cells, real, add30) +
                  (steps_ok ? "" : "; batch steps out of [35,40]")};
}

// ---- 9: survey analytics -----------------------------------------------------

Outcome SurveyAnalytics() {
  std::vector<fs::path> synth_pool, real_pool;
  for (int i = 0; i < 20; ++i) synth_pool.push_back("/survey/g" + std::to_string(i) + ".pgm");
  for (int i = 0; i < 10; ++i) real_pool.push_back("/survey/o" + std::to_string(i) + ".pgm");
  const SurveySession session = CreateSession(synth_pool, real_pool, 1);
  const auto truth = TruthMap({session});

  // Participant p answers image k correctly unless (p + k) % 3 == 0.
  std::vector<SurveyResponse> rs;
  int counts[2][2] = {{0, 0}, {0, 0}};  // [truth][guess], 0 = real
  for (int p = 0; p < 11; ++p) {
    for (int k = 0; k < 30; ++k) {
      const SurveyImage& img = session.images[static_cast<size_t>(k)];
      const bool right = (p + k) % 3 != 0;
      const Source guess =
          right ? img.truth : (img.truth == Source::kReal ? Source::kSynthetic : Source::kReal);
      rs.push_back({"p" + std::to_string(p), img.id, guess, 1 + (p + k) % 5, "texture", k});
      ++counts[img.truth == Source::kSynthetic][guess == Source::kSynthetic];
    }
  }
  const SurveyReport rep = BuildReport(rs, truth);
  const double real_n = counts[0][0] + counts[0][1];
  const double synth_n = counts[1][0] + counts[1][1];
  const double overall = (counts[0][0] + counts[1][1]) / (real_n + synth_n);
  bool ok = std::abs(rep.overall_accuracy - overall) <= 1e-12 &&
            std::abs(rep.accuracy_real - counts[0][0] / real_n) <= 1e-12 &&
            std::abs(rep.accuracy_synthetic - counts[1][1] / synth_n) <= 1e-12;
  for (int t = 0; t < 2; ++t) {
    const double n = counts[t][0] + counts[t][1];
    for (int g = 0; g < 2; ++g) ok &= std::abs(rep.confusion[t][g] - counts[t][g] / n) <= 1e-12;
    ok &= std::abs(rep.confusion[t][0] + rep.confusion[t][1] - 1.0) <= 1e-9;
  }

  std::vector<SurveyResponse> all_real;
  for (int p = 0; p < 11; ++p)
    for (const auto& img : session.images)
      all_real.push_back({"p" + std::to_string(p), img.id, Source::kReal, 3, "", 0});
  const double degenerate = BuildReport(all_real, truth).overall_accuracy;
  ok &= std::abs(degenerate - 10.0 / 30.0) <= 1e-12;
  return {ok, Fmt("overall %.4f (expected %.4f); confusion rows [%.4f %.4f]", rep.overall_accuracy,
                  overall, rep.confusion[0][0], rep.confusion[0][1]) +
                  Fmt(" [%.4f %.4f]; all-real overall %.4f", rep.confusion[1][0],
                      rep.confusion[1][1], degenerate)};
}

// ---- 10: determinism --------------------------------------------------------

IniConfig SmallExperiment() {
  return IniConfig::Parse(R"(
[experiment]
seed = 11
subwell_images = 2
real_images = 60
train = 30
val = 15
test = 15
[patchify]
train_count = 24
[unet]
block_channels = 4,8
time_embed_dim = 8
[train]
epochs = 2
batch_size = 4
fid_every_epochs = 1
fid_samples = 6
[train.fid_sampler]
steps = 3
[sample]
count = 16
batch = 8
min_steps = 3
max_steps = 5
[detector]
epochs = 3
)");
}

std::map<std::string, std::string> ReadTree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = ReadTextFile(e.path());
  }
  return out;
}

Outcome Determinism(const fs::path& out) {
  const fs::path a = out / "first";
  const fs::path b = out / "rerun";
  fs::remove_all(a);
  fs::remove_all(b);
  const IniConfig ini = SmallExperiment();
  RunDeskExperiment(DeskExperimentConfigFrom(ini), a);
  WriteRunRecord(a, "experiment", ini);

  // The rerun reads its configuration back from the run record.
  const std::string record = ReadTextFile(a / "run_record.txt");
  const std::string marker = "--- config ---\n";
  const size_t at = record.find(marker);
  if (at == std::string::npos) return {false, "run record has no config section"};
  const IniConfig recorded = IniConfig::Parse(record.substr(at + marker.size()));
  RunDeskExperiment(DeskExperimentConfigFrom(recorded), b);
  WriteRunRecord(b, "experiment", recorded);

  const auto ta = ReadTree(a);
  const auto tb = ReadTree(b);
  int manifests = 0, metrics = 0, differing = 0;
  std::string first_diff;
  for (const auto& [name, bytes] : ta) {
    auto it = tb.find(name);
    if (it == tb.end() || it->second != bytes) {
      if (first_diff.empty()) first_diff = name;
      ++differing;
    }
    manifests += name.ends_with(".manifest");
    metrics += name.find("metrics") != std::string::npos || name.ends_with("report.csv");
  }
  const bool ok = differing == 0 && ta.size() == tb.size() && manifests >= 7 && metrics >= 7;
  return {ok, Fmt("%.0f files compared (%.0f manifests, %.0f metrics files); %.0f differ", ta.size(),
                  manifests, metrics, differing) +
                  (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace brightsynth

int main(int argc, char** argv) {
  namespace bs = brightsynth;
  bs::TuneAllocator();
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string out = "acceptance_runs";
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--out", out, "Directory for end-to-end runs");
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path root = std::filesystem::absolute(out);
  const std::vector<bs::Criterion> criteria = {
      {1, "sampler analytic oracle", bs::SamplerOracle},
      {2, "step identities", bs::StepIdentities},
      {3, "finite-difference gradients", bs::FiniteDifferences},
      {4, "frechet distance", bs::FrechetChecks},
      {5, "map brute-force equivalence", bs::MapOracle},
      {6, "dataset mixing", bs::MixArithmetic},
      {7, "auto-label fidelity", bs::AutolabelFidelity},
      {8, "desk experiment", [&] { return bs::DeskExperiment(root / "desk"); }},
      {9, "survey analytics", bs::SurveyAnalytics},
      {10, "determinism", [&] { return bs::Determinism(root / "determinism"); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    bs::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s | %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
