/*
 * Copyright 2026 The AlphaTree Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alphatree/boosting.h"
#include "alphatree/estimators.h"
#include "alphatree/fairness.h"
#include "alphatree/io.h"
#include "alphatree/metrics.h"
#include "test_util.h"

namespace alphatree {
namespace {

using testing::RandomDataset;
using testing::RandomTree;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failures; keeps the first few messages.
class Checker {
 public:
  void Expect(bool condition, const std::string& message) {
    ++checks_;
    if (condition) return;
    ++failures_;
    if (failures_ <= 3) messages_ << (failures_ > 1 ? "; " : "") << message;
  }
  void Note(const std::string& note) { notes_ << (notes_.tellp() > 0 ? ", " : "") << note; }

  Outcome Result() const {
    std::ostringstream detail;
    detail << checks_ - failures_ << "/" << checks_ << " checks";
    if (notes_.tellp() > 0) detail << ", " << notes_.str();
    if (failures_ > 0) detail << "; first failures: " << messages_.str();
    return {failures_ == 0, detail.str()};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  mutable std::ostringstream messages_;
  mutable std::ostringstream notes_;
};

std::string Fmt(double value) {
  std::ostringstream out;
  out.precision(10);
  out << value;
  return out.str();
}

bool Near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Outcome ClipIntervals() {
  Checker check;
  const ClipBound one(1.0);
  const ClipBound three(3.0);
  check.Expect(Near(one.lower(), 0.268941, 1e-5), "B=1 lower " + Fmt(one.lower()));
  check.Expect(Near(one.upper(), 0.731059, 1e-5), "B=1 upper " + Fmt(one.upper()));
  check.Expect(Near(three.lower(), 0.047426, 1e-5), "B=3 lower " + Fmt(three.lower()));
  check.Expect(Near(three.upper(), 0.952574, 1e-5), "B=3 upper " + Fmt(three.upper()));
  return check.Result();
}

Outcome KlConstants() {
  Checker check;
  const double s1 = KlBoundS1(3.0);
  const double s2 = KlBoundS2();
  check.Expect(Near(s1, 0.0743, 5e-4), "s1(3) = " + Fmt(s1));
  check.Expect(Near(s2, 0.4112, 1e-3), "s2 = " + Fmt(s2));
  check.Note("s1(3)=" + Fmt(s1) + " s2=" + Fmt(s2));
  return check.Result();
}

// Random synthetic task for the induction bounds.
struct BoundCase {
  Dataset data;
  TargetPosterior target;
  InductionConfig config;
};

BoundCase RandomBoundCase(std::mt19937_64& rng, Scoring scoring) {
  std::uniform_int_distribution<int> rows(20, 500);
  std::uniform_int_distribution<int> numeric(1, 5);
  std::uniform_real_distribution<double> clip(0.5, 3.0);
  const bool categorical = rng() % 2 == 0;
  const bool with_target = rng() % 2 == 0;
  Dataset data = RandomDataset(rng, {.rows = rows(rng),
                                     .numeric_features = numeric(rng),
                                     .categorical = categorical,
                                     .groups = 1 + static_cast<int>(rng() % 3),
                                     .clip_B = clip(rng),
                                     .target = with_target,
                                     .weights = rng() % 2 == 0});
  TargetPosterior target = with_target ? TargetPosterior(*data.target()) : LabelPlugin(data);
  InductionConfig config;
  config.scoring = scoring;
  config.max_iterations = 1 + static_cast<int>(rng() % 16);
  config.min_child_count = 1 + static_cast<int>(rng() % 20);
  config.min_child_fraction = 0.01 + 0.02 * static_cast<double>(rng() % 6);
  return {std::move(data), std::move(target), config};
}

Outcome EntropyBound() {
  Checker check;
  std::mt19937_64 rng(1001);
  int grown = 0;
  for (int run = 0; run < 200; ++run) {
    const BoundCase c = RandomBoundCase(rng, Scoring::kConservative);
    const AlignmentInputs inputs = AlignmentInputs::FromDataset(c.data, c.target);
    const View all = View::All(c.data);
    const TopDownResult result = TopDown(all, inputs, AlphaTree(), c.config);
    grown += result.splits > 0;
    const double risk = EmpiricalRisk(all, c.data.WrappedScores(result.tree), c.target);
    const double entropy = TreeEntropy(result.tree, all, inputs);
    check.Expect(risk <= entropy + 1e-9,
                 "run " + std::to_string(run) + ": risk " + Fmt(risk) + " > " + Fmt(entropy));
  }
  check.Note(std::to_string(grown) + " of 200 trees split");
  return check.Result();
}

Outcome AudaciousBound() {
  Checker check;
  std::mt19937_64 rng(1003);
  for (int run = 0; run < 200; ++run) {
    const BoundCase c = RandomBoundCase(rng, Scoring::kAudacious);
    const AlignmentInputs inputs = AlignmentInputs::FromDataset(c.data, c.target);
    const View all = View::All(c.data);
    const TopDownResult result = TopDown(all, inputs, AlphaTree(), c.config);
    const double risk = EmpiricalRisk(all, c.data.WrappedScores(result.tree), c.target);
    const double bound = TreeAudaciousBound(result.tree, all, inputs);
    check.Expect(risk <= bound + 1e-9,
                 "run " + std::to_string(run) + ": risk " + Fmt(risk) + " > " + Fmt(bound));
    for (const auto& [leaf, weight] : LeafWeights(all, result.tree)) {
      if (weight <= 0.0) continue;
      const LeafStats stats = ComputeLeafStats(ConditionOnLeaf(all, result.tree, leaf), inputs);
      const double leaf_bound = AudaciousLeafBound(stats.edge_pos, stats.edge_neg);
      check.Expect(leaf_bound <= LeafEntropy(stats.edge) + 1e-12,
                   "leaf bound " + Fmt(leaf_bound) + " > entropy " + Fmt(stats.entropy));
    }
  }
  return check.Result();
}

Outcome Composition() {
  Checker check;
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(-3.0, 3.0);
  double worst = 0.0;
  // Posteriors as the wrapper sees them: clipped with B in [0.5, 3].
  for (int t = 0; t < 10000; ++t) {
    const ClipBound bound(0.5 + 2.5 * unit(rng));
    const double q = bound.lower() + (bound.upper() - bound.lower()) * unit(rng);
    const double a = alpha(rng);
    const double b = alpha(rng);
    const double sequential = ApplyAlpha(ApplyAlpha(q, a), b);
    const double product = ApplyAlpha(q, ComposeAlpha(a, b));
    worst = std::max(worst, std::abs(sequential - product));
    check.Expect(Near(sequential, product, 1e-12),
                 "q=" + Fmt(q) + " a=" + Fmt(a) + " b=" + Fmt(b));
  }
  check.Note("max composition error " + Fmt(worst));

  // Inversion: leaves alphas bounded away from 0 so 1/alpha stays moderate.
  double worst_inverse = 0.0;
  std::uniform_real_distribution<double> magnitude(0.25, 4.0);
  int probes = 0;
  while (probes < 10000) {
    const Dataset data = RandomDataset(rng, {.rows = 500, .clip_B = 0.5 + 2.5 * unit(rng)});
    AlphaTree tree = RandomTree(rng, data, 12, 1.0, 1.0);
    for (int leaf : tree.LeafIds()) {
      tree.SetLeafAlpha(leaf, (rng() % 2 ? 1.0 : -1.0) * magnitude(rng));
    }
    const std::vector<AlphaTree> chain = {tree, InvertTree(tree)};
    for (int row = 0; row < data.num_rows(); ++row, ++probes) {
      const double q = data.scores()(row);
      const double back = WrapChain(chain, q, data.Row(row));
      worst_inverse = std::max(worst_inverse, std::abs(back - q));
      check.Expect(Near(back, q, 1e-10), "inverse chain moved " + Fmt(q) + " to " + Fmt(back));
    }
  }
  check.Note("max inversion error " + Fmt(worst_inverse));
  return check.Result();
}

Outcome ProximityS1() {
  Checker check;
  std::mt19937_64 rng(1007);
  const double B = 3.0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Dataset data = RandomDataset(
        rng, {.rows = 50 + static_cast<int>(rng() % 450), .clip_B = B, .weights = rng() % 2 == 0});
    const AlphaTree tree = RandomTree(rng, data, static_cast<int>(rng() % 10), 1.0 - 1.0 / B,
                                      1.0 + 1.0 / B);
    check.Expect(S1Applicable(tree, B), "tree outside the S1 band");
    const double kl = EmpiricalKl(View::All(data), data.scores(), data.WrappedScores(tree));
    worst = std::max(worst, kl);
    check.Expect(kl <= 0.0743 + 1e-6, "kl " + Fmt(kl));
  }
  check.Note("max kl " + Fmt(worst));
  return check.Result();
}

Outcome UnitConfidence() {
  Checker check;
  std::mt19937_64 rng(1009);
  for (int t = 0; t < 50; ++t) {
    const Dataset data = RandomDataset(rng, {.rows = 30 + static_cast<int>(rng() % 100),
                                             .weights = t % 2 == 1});
    const View all = View::All(data);
    const Eigen::ArrayXd positive = (data.labels() > 0.0).cast<double>();
    const double qhat = all.Expectation(positive);
    if (qhat <= 0.0 || qhat >= 1.0) continue;
    const AlignmentInputs inputs = AlignmentInputs::UnitConfidence(LabelPlugin(data), data.clip());
    check.Expect(Near(Edge(all, inputs), 2.0 * qhat - 1.0, 1e-14),
                 "edge " + Fmt(Edge(all, inputs)) + " vs " + Fmt(2.0 * qhat - 1.0));
    const BalancedMeasure m = BalancedWeights(all, inputs);
    for (int i = 0; i < all.size(); ++i) {
      const double w = all.weights()(i);
      const bool pos = positive(all.rows()[i]) > 0.0;
      const double expected_pos = pos ? w / (2.0 * qhat) : 0.0;
      const double expected_neg = pos ? 0.0 : w / (2.0 * (1.0 - qhat));
      check.Expect(Near(m.positive(i), expected_pos, 1e-14 * std::max(1.0, expected_pos)),
                   "positive weight " + Fmt(m.positive(i)) + " vs " + Fmt(expected_pos));
      check.Expect(Near(m.negative(i), expected_neg, 1e-14 * std::max(1.0, expected_neg)),
                   "negative weight " + Fmt(m.negative(i)) + " vs " + Fmt(expected_neg));
    }
  }
  return check.Result();
}

// Random one-feature leaves; each threshold split where the weak hypothesis
// check holds at its witnessed gamma is tested against the certificate.
Outcome DecreaseCertificateCheck() {
  Checker check;
  std::mt19937_64 rng(1011);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int witnessed = 0;
  double q_lo = 1.0, q_hi = 0.0;
  for (int t = 0; t < 600; ++t) {
    const double B = 0.5 + 2.5 * unit(rng);
    const double base = unit(rng);
    const double slope = 2.0 * unit(rng) - 1.0;
    // Alignment of the score with eta; large values push the leaf edge
    // towards +-1 so that q covers most of (0, 1).
    const double align = t % 2 ? 0.0 : 3.0 * (2.0 * unit(rng) - 1.0);
    const double noise = unit(rng);
    DatasetBuilder builder({{"x", FeatureKind::kNumeric}}, "s", ClipBound(B));
    const int rows = 20 + static_cast<int>(rng() % 60);
    for (int i = 0; i < rows; ++i) {
      const double x = unit(rng);
      const double eta = std::clamp(base + slope * (x - 0.5), 0.0, 1.0);
      const double nlogit = std::clamp(
          align * (2.0 * eta - 1.0) + (align != 0.0 ? noise : 1.0) * (2.0 * unit(rng) - 1.0),
          -1.0, 1.0);
      const double score = 1.0 / (1.0 + std::exp(-B * nlogit));
      builder.AddRow({x}, unit(rng) < eta ? 1 : -1, "g", score, 0.5 + unit(rng), eta);
    }
    const Dataset data = std::move(builder).Build();
    const AlignmentInputs inputs =
        AlignmentInputs::FromDataset(data, TargetPosterior(*data.target()));
    const View all = View::All(data);
    if (std::abs(Edge(all, inputs)) >= 1.0 - 1e-9) continue;
    for (int k = 1; k < 10; ++k) {
      const SplitTest split = SplitTest::Numeric("x", 0.1 * k);
      const SplitGeometry g = ComputeSplitGeometry(all, split, inputs);
      if (g.tau <= 0.0 || g.tau >= 1.0) continue;
      const WhaReport report = WhaCheck(all, split, inputs);
      if (!(report.gamma_witnessed > 0.0 && report.HoldsAt(report.gamma_witnessed))) continue;
      ++witnessed;
      q_lo = std::min(q_lo, g.q);
      q_hi = std::max(q_hi, g.q);
      const double pre = LeafEntropy(2.0 * g.q - 1.0);
      const double post = g.tau * LeafEntropy(2.0 * g.r - 1.0) +
                          (1.0 - g.tau) * LeafEntropy(2.0 * g.p - 1.0);
      check.Expect(DecreaseCertificate(pre, post, g.q, report.gamma_witnessed),
                   "q=" + Fmt(g.q) + " gamma=" + Fmt(report.gamma_witnessed) + " decrease " +
                       Fmt(pre - post) + " < " +
                       Fmt(report.gamma_witnessed * report.gamma_witnessed * g.q * (1 - g.q)));
    }
  }
  check.Note(std::to_string(witnessed) + " witnessed splits, q in [" + Fmt(q_lo) + ", " +
             Fmt(q_hi) + "]");
  check.Expect(witnessed > 0, "no fixture witnessed the assumption");
  return check.Result();
}

// Two groups, four x-cells with eta {0.2, 0.4, 0.6, 0.8}. Scores sit at the
// clip ends: group a is scored positive in cells 1-3, group b in cells 0 and
// 3. Exactly eta of each cell is labelled positive, so the advantage rates
// are 0.9 and 0.5.
Dataset PlantedEooFixture() {
  const double B = 2.0;
  const double high = 1.0 / (1.0 + std::exp(-B));
  const double cell_eta[] = {0.2, 0.4, 0.6, 0.8};
  const int per_cell = 250;
  DatasetBuilder builder({{"x", FeatureKind::kNumeric}}, "s", ClipBound(B));
  for (const char* group : {"a", "b"}) {
    const bool b = std::string(group) == "b";
    for (int cell = 0; cell < 4; ++cell) {
      const int positives = static_cast<int>(std::lround(cell_eta[cell] * per_cell));
      const bool advantaged = b ? (cell == 0 || cell == 3) : cell >= 1;
      for (int i = 0; i < per_cell; ++i) {
        const double x = (cell + (i + 0.5) / per_cell) / 4.0;
        // Spread the positives evenly over the cell.
        const int label = (i * positives) / per_cell != ((i + 1) * positives) / per_cell ? 1 : -1;
        builder.AddRow({x}, label, group, advantaged ? high : 1.0 - high, 1.0, cell_eta[cell]);
      }
    }
  }
  return std::move(builder).Build();
}

double GapOf(const Dataset& data, const AlphaTree& tree) {
  return std::abs(AdvantageRate(data, tree, "a") - AdvantageRate(data, tree, "b"));
}

Outcome EooDeskCheck() {
  Checker check;
  const Dataset data = PlantedEooFixture();
  const double planted = GapOf(data, AlphaTree());
  check.Expect(Near(planted, 0.4, 1e-12), "planted gap " + Fmt(planted));
  StrategySpec spec;
  spec.kind = StrategyKind::kEoo;
  spec.epsilon = 0.2;
  spec.stop_on_gap = false;
  const DriverResult result = RunEoo(data, spec, InitStump(data), TargetPosterior(*data.target()));
  check.Expect(result.stop_reason == "stopping_inequality", "stopped on " + result.stop_reason);
  const double gap = GapOf(data, result.tree);
  check.Expect(gap <= 0.2, "terminal gap " + Fmt(gap));
  check.Note("gap " + Fmt(planted) + " -> " + Fmt(gap) + " after " +
             std::to_string(result.splits) + " splits, stop " + result.stop_reason);
  return check.Result();
}

// Constant positive rate 0.7; the black-box under-scores group b, with noise.
Outcome CvarToy() {
  Checker check;
  std::mt19937_64 rng(1013);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  DatasetBuilder builder({{"x", FeatureKind::kNumeric}}, "s", ClipBound(2.0));
  for (int i = 0; i < 1000; ++i) {
    const bool b = i % 2 == 1;
    const double x = unit(rng);
    const double mean = b ? 0.2 + 0.2 * x : 0.65 + 0.1 * x;
    const double score = std::clamp(mean + noise(rng), 0.01, 0.99);
    builder.AddRow({x}, unit(rng) < 0.7 ? 1 : -1, b ? "b" : "a", score);
  }
  const Dataset data = std::move(builder).Build();
  StrategySpec spec;
  spec.kind = StrategyKind::kCvar;
  spec.beta = 0.9;
  spec.induction.max_iterations = 32;
  const double before = CvarMetric(data, AlphaTree(), 0.9);
  const DriverResult result = RunCvar(data, spec, InitStump(data));
  const double after = CvarMetric(data, result.tree, 0.9);
  check.Expect(result.splits <= 32, "splits " + std::to_string(result.splits));
  check.Expect(after < before, "cvar " + Fmt(before) + " -> " + Fmt(after));
  check.Note("cvar " + Fmt(before) + " -> " + Fmt(after) + " in " +
             std::to_string(result.splits) + " splits");
  return check.Result();
}

Outcome PushupProperties() {
  Checker check;
  PushupParams worked;
  worked.delta = 0.1;
  worked.eta_floor = 0.3;
  Eigen::ArrayXd values(3);
  values << 0.4, 0.25, 0.8;
  const TargetPosterior pushed = ApplyPushup(TargetPosterior(values), worked);
  check.Expect(pushed(0) == 0.5 + 0.1, "0.4 -> " + Fmt(pushed(0)));
  check.Expect(pushed(1) == 0.25, "0.25 -> " + Fmt(pushed(1)));
  check.Expect(pushed(2) == 0.8, "0.8 -> " + Fmt(pushed(2)));

  std::mt19937_64 rng(1015);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Dataset data = RandomDataset(rng, {.rows = 100, .target = true, .weights = t % 2 == 0});
    const TargetPosterior eta(*data.target());
    const double p = unit(rng);
    const double delta = 0.5 * unit(rng);
    const auto [once, params] = PushupPosterior(eta, View::All(data), p, delta);
    const TargetPosterior twice = ApplyPushup(once, params);
    check.Expect((twice.values() == once.values()).all(), "pushup is not idempotent");

    PushupParams high = params;
    high.eta_floor = 0.5 + 0.5 * unit(rng);
    check.Expect((ApplyPushup(eta, high).values() == eta.values()).all(),
                 "floor " + Fmt(high.eta_floor) + " changed eta");
    if (params.IsIdentity()) {
      check.Expect((once.values() == eta.values()).all(), "identity params changed eta");
    }
  }
  return check.Result();
}

Outcome Serialization() {
  Checker check;
  std::mt19937_64 rng(1017);
  const Dataset probe = RandomDataset(rng, {.rows = 1000, .clip_B = 2.0});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double spread = 0.1 + 10.0 * unit(rng);
    AlphaTree tree = RandomTree(rng, probe, static_cast<int>(rng() % 40), -spread, spread);
    for (int leaf : tree.LeafIds()) tree.SetLeafStats(leaf, 2.0 * unit(rng) - 1.0, unit(rng));
    ModelMeta meta;
    meta.clip_B = probe.clip().half_width();
    meta.group_column = probe.group_column();
    meta.strategy = "cvar";
    meta.scoring = t % 2 ? Scoring::kAudacious : Scoring::kConservative;
    meta.iterations = t;
    const std::string text = ModelToJson(tree, meta);
    const Model back = ModelFromJson(text);
    check.Expect(back.tree == tree, "tree " + std::to_string(t) + " changed structure");
    check.Expect(ModelToJson(back.tree, back.meta) == text,
                 "tree " + std::to_string(t) + " text differs");
    const Eigen::ArrayXd a = probe.WrappedScores(tree);
    const Eigen::ArrayXd b = probe.WrappedScores(back.tree);
    bool identical = true;
    for (int i = 0; i < a.size(); ++i) {
      identical = identical && std::bit_cast<std::uint64_t>(a(i)) == std::bit_cast<std::uint64_t>(b(i));
    }
    check.Expect(identical, "tree " + std::to_string(t) + " outputs differ");
  }
  return check.Result();
}

}  // namespace
}  // namespace alphatree

int main() {
  using alphatree::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"clip intervals", alphatree::ClipIntervals},
      {"kl bound constants", alphatree::KlConstants},
      {"entropy upper bound", alphatree::EntropyBound},
      {"audacious bound and ordering", alphatree::AudaciousBound},
      {"composition and inversion", alphatree::Composition},
      {"proximity under s1", alphatree::ProximityS1},
      {"unit-confidence reduction", alphatree::UnitConfidence},
      {"decrease certificate", alphatree::DecreaseCertificateCheck},
      {"eoo desk check", alphatree::EooDeskCheck},
      {"cvar toy", alphatree::CvarToy},
      {"pushup properties", alphatree::PushupProperties},
      {"serialization", alphatree::Serialization},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << " ("
              << outcome.detail << "; " << std::fixed << std::setprecision(2) << seconds
              << "s)" << std::defaultfloat << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
