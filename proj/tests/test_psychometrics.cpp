#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "quantiscene/errors.hpp"
#include "quantiscene/psychometrics.hpp"
#include "quantiscene/subjects.hpp"

using namespace quantiscene;

namespace {

// Published accuracy table, transcribed row by row: size-controlled columns
// all, 1:2 ... 7:8, then the same for area-controlled.
struct PublishedRow {
  const char* train;
  PositionMode mode;
  int cells[16];
};

constexpr PublishedRow kPublished[] = {
    {"Q-full", PositionMode::random, {92, 100, 99, 97, 94, 91, 88, 85, 93, 100, 99, 97, 93, 91, 86, 82}},
    {"Q-full", PositionMode::paired, {93, 99, 99, 96, 93, 90, 88, 82, 93, 99, 99, 96, 91, 87, 84, 80}},
    {"Q-full", PositionMode::partitioned, {89, 100, 99, 92, 90, 81, 77, 72, 89, 99, 98, 92, 88, 82, 78, 72}},
    {"Q-half", PositionMode::random, {92, 100, 100, 98, 93, 88, 88, 87, 93, 100, 100, 97, 92, 86, 85, 82}},
    {"Q-half", PositionMode::paired, {92, 100, 100, 96, 90, 86, 84, 79, 92, 100, 99, 96, 87, 84, 79, 76}},
    {"Q-half", PositionMode::partitioned, {91, 100, 99, 96, 86, 83, 83, 80, 91, 100, 99, 94, 89, 83, 83, 80}},
};

constexpr const char* kColumns[] = {"all", "1:2", "2:3", "3:4", "4:5", "5:6", "6:7", "7:8"};

// Published accuracy at n:(n+1) for n = 1 ... 10.
constexpr double kRandomCurve[] = {1.0, 0.99, 0.97, 0.94, 0.91, 0.88, 0.85, 0.79, 0.77, 0.73};
constexpr double kPairedCurve[] = {0.99, 0.99, 0.96, 0.93, 0.90, 0.88, 0.82, 0.78, 0.78, 0.73};
constexpr double kPartitionedCurve[] = {1.0, 0.99, 0.92, 0.90, 0.81, 0.77, 0.72, 0.69, 0.64, 0.61};

std::vector<PsychometricPoint> exact_points(double w, std::int64_t trials = 1024) {
  std::vector<PsychometricPoint> pts;
  for (int n = 2; n <= 10; ++n) {
    const double r = (n + 1.0) / n;
    pts.push_back({r, ans_accuracy(r, w), trials});
  }
  return pts;
}

// Ratios spread over the informative part of the curve, at accuracy levels
// 0.55, 0.575, ..., 0.95 of the true w.
std::vector<PsychometricPoint> design_points(double w) {
  std::vector<PsychometricPoint> pts;
  for (int i = 0; i <= 16; ++i) {
    const double r = threshold_ratio(w, 0.55 + 0.025 * i);
    pts.push_back({r, ans_accuracy(r, w), 1024});
  }
  return pts;
}

std::vector<PsychometricPoint> binomial(std::vector<PsychometricPoint> pts, Rng& rng) {
  for (auto& p : pts) {
    int hits = 0;
    for (int t = 0; t < p.trials; ++t) hits += rng.bernoulli(p.accuracy);
    p.accuracy = static_cast<double>(hits) / static_cast<double>(p.trials);
  }
  return pts;
}

InstanceRecord record(std::string id, CellRef cell, bool agreement) {
  InstanceRecord r;
  r.id = std::move(id);
  r.cell = std::move(cell);
  r.agreement = agreement;
  return r;
}

std::vector<InstanceRecord> synthetic_grid(int per_cell, Rng& rng) {
  std::vector<InstanceRecord> out;
  int k = 0;
  for (PositionMode mode : {PositionMode::random, PositionMode::partitioned, PositionMode::paired}) {
    for (bool area : {false, true}) {
      for (const char* ratio : kColumns) {
        for (int i = 0; i < per_cell; ++i) {
          out.push_back(record("r" + std::to_string(k++), CellRef{mode, area, ratio}, rng.coin()));
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("psychometrics") {
  TEST_CASE("fit recovers w from exact model points") {
    const WeberFit fit = fit_weber(exact_points(1.2));
    CHECK(std::abs(fit.w - 1.2) <= 1e-4);
    CHECK(fit.residual >= 0.0);
    CHECK(fit.residual < 1e-8);
  }

  TEST_CASE("fixture curves fit the reported Weber fractions") {
    const auto& fx = reference_fixtures();
    const double random = fit_weber(fx.points(PositionMode::random)).w;
    const double paired = fit_weber(fx.points(PositionMode::paired)).w;
    const double partitioned = fit_weber(fx.points(PositionMode::partitioned)).w;
    CHECK(random >= 1.09);
    CHECK(random <= 1.13);
    CHECK(paired >= 1.09);
    CHECK(paired <= 1.13);
    CHECK(partitioned >= 1.14);
    CHECK(partitioned <= 1.18);
  }

  TEST_CASE("75% thresholds") {
    const double human = threshold_ratio(1.14, 0.75);
    CHECK(human >= 1.138);
    CHECK(human <= 1.148);
    CHECK(std::abs(threshold_ratio(1.11, 0.75) - 10.0 / 9.0) <= 0.01);
    CHECK(std::abs(threshold_ratio(1.16, 0.75) - 7.0 / 6.0) <= 0.01);
    CHECK(threshold_ratio(1.3, 0.5) == 1.0);
    CHECK(std::isinf(threshold_ratio(1.5, 0.999)));
  }

  TEST_CASE("threshold round-trip") {
    for (double w : {1.02, 1.05, 1.11, 1.14, 1.3, 1.8}) {
      for (double level : {0.55, 0.6, 0.75, 0.8, 0.9}) {
        const double r = threshold_ratio(w, level);
        if (std::isinf(r)) continue;
        INFO("w=" << w << " level=" << level);
        CHECK(std::abs(ans_accuracy(r, w) - level) <= 1e-6);
      }
    }
  }

  TEST_CASE("fit consistency under binomial noise") {
    Rng rng(2024);
    for (double w : {1.05, 1.1, 1.2, 1.5}) {
      int close = 0;
      for (int rep = 0; rep < 100; ++rep) close += std::abs(fit_weber(binomial(design_points(w), rng)).w - w) <= 0.02;
      INFO("w=" << w);
      CHECK(close >= 95);
    }
  }

  TEST_CASE("harder data never lowers the threshold") {
    Rng rng(5);
    std::vector<std::vector<PsychometricPoint>> sets;
    for (PositionMode m : {PositionMode::random, PositionMode::paired, PositionMode::partitioned}) {
      sets.push_back(reference_fixtures().points(m));
    }
    for (int i = 0; i < 30; ++i) sets.push_back(binomial(exact_points(rng.uniform(1.05, 1.3)), rng));
    for (const auto& pts : sets) {
      auto harder = pts;
      for (auto& p : harder) p.accuracy = std::max(0.0, p.accuracy - 0.05);
      const double before = threshold_ratio(fit_weber(pts).w, 0.75);
      const double after = threshold_ratio(fit_weber(harder).w, 0.75);
      CHECK(after >= before);
    }
  }

  TEST_CASE("degenerate data is rejected") {
    CHECK_THROWS_AS(fit_weber({{1.5, 0.9, 10}, {1.2, 0.8, 10}}), DegenerateData);
    CHECK_THROWS_AS(fit_weber({{1.5, 1.0, 10}, {1.2, 0.995, 10}, {1.1, 0.99, 10}}), DegenerateData);
    CHECK_THROWS_AS(fit_weber({{1.5, 0.5, 10}, {1.2, 0.4, 10}, {1.1, 0.5, 10}}), DegenerateData);
    CHECK_THROWS_AS(validate(PsychometricPoint{1.0, 0.7, 10}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PsychometricPoint{1.2, 1.5, 10}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PsychometricPoint{1.2, 0.7, 0}), std::invalid_argument);
    const ModeFit mf = fit_points("flat", {{1.5, 1.0, 10}, {1.2, 1.0, 10}, {1.1, 1.0, 10}});
    CHECK_FALSE(mf.fit.has_value());
    CHECK_FALSE(mf.error.empty());
  }

  TEST_CASE("bootstrap standard error is deterministic and sensible") {
    const auto pts = exact_points(1.14);
    const double se = bootstrap_weber_stderr(pts, 200, 9);
    CHECK(se == bootstrap_weber_stderr(pts, 200, 9));
    CHECK(se > 0.0);
    CHECK(se < 0.02);
  }

  TEST_CASE("aggregate: totals, all-correct and permutation invariance") {
    Rng rng(3);
    auto records = synthetic_grid(20, rng);
    std::vector<SubjectAnswer> truthful, coin;
    for (const auto& r : records) {
      truthful.push_back({r.id, *r.agreement});
      coin.push_back({r.id, rng.coin()});
    }
    const GridReport perfect = aggregate(records, truthful);
    CHECK(perfect.cells.size() == 48);
    for (const EvalCell& c : perfect.cells) CHECK(perfect.percent(c) == 100.0);
    const GridReport a = aggregate(records, coin);
    std::vector<SubjectAnswer> shuffled_answers = coin;
    rng.shuffle(shuffled_answers);
    rng.shuffle(records);
    const GridReport b = aggregate(records, shuffled_answers);
    CHECK(a.correct == b.correct);
    CHECK(a.trials == b.trials);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      CHECK(a.cells[i].cell == b.cells[i].cell);
      CHECK(a.cells[i].correct == b.cells[i].correct);
    }
    REQUIRE(a.curves.size() == 3);
    for (const ModeCurve& curve : a.curves) CHECK(curve.points.size() == 7);
  }

  TEST_CASE("aggregate: coin-flip subject stays within the binomial band") {
    Rng rng(4);
    const auto records = synthetic_grid(1024, rng);
    std::vector<SubjectAnswer> coin;
    for (const auto& r : records) coin.push_back({r.id, rng.coin()});
    const GridReport report = aggregate(records, coin);
    for (const EvalCell& c : report.cells) {
      INFO(c.cell.label());
      CHECK(report.percent(c) >= 45.0);
      CHECK(report.percent(c) <= 55.0);
    }
  }

  TEST_CASE("aggregate: missing ground truth and duplicates") {
    std::vector<InstanceRecord> records{record("a", CellRef{}, true)};
    CHECK_THROWS_AS(aggregate(records, {{"b", true}}), MissingGroundTruth);
    CHECK_THROWS_AS(aggregate(records, {{"a", true}, {"a", false}}), std::invalid_argument);
    records[0].agreement.reset();
    CHECK_THROWS_AS(aggregate(records, {{"a", true}}), MissingGroundTruth);
    records[0].agreement = true;
    records.push_back(records[0]);
    CHECK_THROWS_AS(aggregate(records, {{"a", true}}), std::invalid_argument);
  }

  TEST_CASE("percentages round to the configured precision") {
    std::vector<InstanceRecord> records;
    std::vector<SubjectAnswer> answers;
    for (int i = 0; i < 3; ++i) {
      records.push_back(record("x" + std::to_string(i), CellRef{}, true));
      answers.push_back({records.back().id, i < 2});
    }
    CHECK(aggregate(records, answers, "s", 0).percent(aggregate(records, answers).cells[0]) == 67.0);
    CHECK(aggregate(records, answers, "s", 2).percent(aggregate(records, answers).cells[0]) == 66.67);
  }

  TEST_CASE("fixture table matches the published values") {
    const auto& fx = reference_fixtures();
    CHECK(fx.grid.size() == 96);
    for (const PublishedRow& row : kPublished) {
      for (int i = 0; i < 16; ++i) {
        const bool area = i >= 8;
        const char* ratio = kColumns[i % 8];
        INFO(row.train << " " << to_string(row.mode) << " " << (area ? "area" : "size") << " " << ratio);
        CHECK(fx.cell(row.train, row.mode, area, ratio) == row.cells[i]);
      }
    }
    CHECK(fx.cell("Q-full", PositionMode::partitioned, false, "7:8") == 72);
    CHECK(fx.cell("Q-full", PositionMode::random, false, "1:2") == 100);
    CHECK(fx.cell("Q-full", PositionMode::random, false, "all") == 92);
    CHECK(fx.cell("Q-full", PositionMode::random, false, "7:8") == 85);
    CHECK(fx.cell("Q-half", PositionMode::paired, true, "7:8") == 76);
    CHECK_THROWS_AS(fx.cell("Q-other", PositionMode::random, false, "1:2"), std::out_of_range);
  }

  TEST_CASE("fixture curves match the published points") {
    const auto& fx = reference_fixtures();
    for (int n = 1; n <= 10; ++n) {
      CHECK(fx.curve_point(PositionMode::random, n) == kRandomCurve[n - 1]);
      CHECK(fx.curve_point(PositionMode::paired, n) == kPairedCurve[n - 1]);
      CHECK(fx.curve_point(PositionMode::partitioned, n) == kPartitionedCurve[n - 1]);
    }
    CHECK(fx.curve_point(PositionMode::random, 10) == 0.73);
    const auto pts = fx.points(PositionMode::partitioned);
    REQUIRE(pts.size() == 9);
    const auto [lo, hi] = std::minmax_element(
        pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
    CHECK(hi->ratio == doctest::Approx(1.5));
    CHECK(hi->accuracy == 0.99);
    CHECK(lo->ratio == doctest::Approx(1.1));
    CHECK(lo->accuracy == 0.61);
  }

  TEST_CASE("fixture checksum is frozen") {
    const auto& fx = reference_fixtures();
    CHECK(fx.checksum() == fx.checksum());
    CHECK(fx.checksum() == "37d51b476cd5ca0b6f111cdcecf0885606805c8749b70b8d8abeeed4d71e9c02");
  }

  TEST_CASE("grid CSV round-trips") {
    const GridReport report = reference_fixtures().report("Q-full");
    const std::string csv = grid_csv(report);
    CHECK(csv.rfind("train,mode,area,ratio,accuracy,trials\n", 0) == 0);
    const GridReport back = grid_from_csv(csv);
    REQUIRE(back.cells.size() == report.cells.size());
    for (std::size_t i = 0; i < back.cells.size(); ++i) {
      CHECK(back.cells[i].cell == report.cells[i].cell);
      CHECK(back.cells[i].trials == report.cells[i].trials);
      CHECK(back.percent(back.cells[i]) == report.percent(report.cells[i]));
    }
    CHECK(grid_csv(back) == csv);
    CHECK_THROWS(grid_from_csv("train,mode\nQ,random\n"));
  }

  TEST_CASE("summary JSON and SVG report") {
    const auto& fx = reference_fixtures();
    std::vector<ModeFit> fits;
    fits.push_back(fit_points("random", fx.points(PositionMode::random)));
    fits.push_back(fit_points("flat", {{1.5, 1.0, 10}, {1.2, 1.0, 10}, {1.1, 1.0, 10}}));
    const Json j = summary_json(fits);
    CHECK(j.at("random").at("w").get<double>() == doctest::Approx(fits[0].fit->w));
    CHECK(j.at("random").contains("threshold_75"));
    CHECK(j.at("random").contains("residual"));
    CHECK(j.at("flat").at("w").is_null());
    CHECK(j.at("flat").contains("error"));
    const std::string svg = render_svg(fits, "demo");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
