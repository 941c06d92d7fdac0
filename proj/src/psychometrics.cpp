#include "quantiscene/psychometrics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "quantiscene/checksum.hpp"
#include "quantiscene/errors.hpp"
#include "quantiscene/rng.hpp"
#include "quantiscene/subjects.hpp"

namespace quantiscene {

void validate(const PsychometricPoint& point) {
  if (!(point.ratio > 1.0)) throw std::invalid_argument("psychometric ratio must exceed 1");
  if (!(point.accuracy >= 0.0 && point.accuracy <= 1.0)) {
    throw std::invalid_argument("psychometric accuracy must lie in [0, 1]");
  }
  if (point.trials < 1) throw std::invalid_argument("psychometric point needs at least one trial");
}

namespace {

double weighted_sse(const std::vector<PsychometricPoint>& points, double w) {
  double sum = 0.0;
  for (const PsychometricPoint& p : points) {
    const double e = p.accuracy - ans_accuracy(p.ratio, w);
    sum += static_cast<double>(p.trials) * e * e;
  }
  return sum;
}

}  // namespace

WeberFit fit_weber(const std::vector<PsychometricPoint>& points) {
  for (const PsychometricPoint& p : points) validate(p);
  if (points.size() < 3) throw DegenerateData("fitting needs at least three points");
  const bool saturated =
      std::all_of(points.begin(), points.end(), [](const auto& p) { return p.accuracy >= 0.99; });
  const bool at_chance =
      std::all_of(points.begin(), points.end(), [](const auto& p) { return p.accuracy <= 0.5; });
  if (saturated) throw DegenerateData("every accuracy is at ceiling; w is unidentifiable");
  if (at_chance) throw DegenerateData("every accuracy is at or below chance; w is unidentifiable");

  // A coarse log-spaced scan picks the basin, Brent refines inside it.
  constexpr int kScan = 400;
  const double log_lo = std::log(kWeberLowerBound - 1.0);
  const double log_hi = std::log(kWeberUpperBound - 1.0);
  auto grid = [&](int i) { return 1.0 + std::exp(log_lo + (log_hi - log_lo) * i / kScan); };
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double value = weighted_sse(points, grid(i));
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  const double lo = grid(std::max(best - 1, 0));
  const double hi = grid(std::min(best + 1, kScan));
  const auto [w, residual] = boost::math::tools::brent_find_minima(
      [&](double x) { return weighted_sse(points, x); }, lo, hi,
      std::numeric_limits<double>::digits / 2);
  return {w, residual, std::nullopt};
}

double bootstrap_weber_stderr(const std::vector<PsychometricPoint>& points, int repetitions,
                              std::uint64_t seed) {
  if (repetitions < 2) throw std::invalid_argument("bootstrap needs at least two repetitions");
  std::vector<double> fits(static_cast<std::size_t>(repetitions));
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(repetitions)));
  auto run = [&](unsigned worker) {
    for (std::size_t k = worker; k < fits.size(); k += workers) {
      Rng rng(derive_seed(seed, k));
      std::vector<PsychometricPoint> sample = points;
      for (PsychometricPoint& p : sample) {
        std::int64_t hits = 0;
        for (std::int64_t t = 0; t < p.trials; ++t) hits += rng.bernoulli(p.accuracy) ? 1 : 0;
        p.accuracy = static_cast<double>(hits) / static_cast<double>(p.trials);
      }
      try {
        fits[k] = fit_weber(sample).w;
      } catch (const DegenerateData&) {
        fits[k] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(run, i);
  run(0);
  for (auto& t : pool) t.join();

  double sum = 0.0, sum_sq = 0.0;
  int used = 0;
  for (double w : fits) {
    if (std::isnan(w)) continue;
    sum += w;
    sum_sq += w * w;
    ++used;
  }
  if (used < 2) throw DegenerateData("too few informative bootstrap resamples");
  const double mean = sum / used;
  return std::sqrt(std::max(0.0, (sum_sq - used * mean * mean) / (used - 1)));
}

double threshold_ratio(double w, double level) {
  if (!(w > 1.0)) throw std::invalid_argument("Weber fraction must exceed 1");
  if (!(level >= 0.5 && level < 1.0)) throw std::invalid_argument("level must lie in [0.5, 1)");
  if (level == 0.5) return 1.0;
  const double ceiling = 0.5 * (1.0 + std::erf(1.0 / (std::numbers::sqrt2 * (w - 1.0))));
  if (level >= ceiling) return std::numeric_limits<double>::infinity();
  double hi = 2.0;
  while (ans_accuracy(hi, w) < level) hi *= 2.0;
  const auto [a, b] = boost::math::tools::bisect(
      [&](double r) { return ans_accuracy(r, w) - level; }, 1.0, hi,
      [](double x, double y) { return std::abs(y - x) <= 1e-7; });
  return 0.5 * (a + b);
}

double GridReport::percent(const EvalCell& cell) const {
  const double scale = std::pow(10.0, precision);
  return std::round(100.0 * cell.accuracy() * scale) / scale;
}

const EvalCell* GridReport::find(const CellRef& cell) const {
  for (const EvalCell& c : cells) {
    if (c.cell == cell) return &c;
  }
  return nullptr;
}

double ratio_value(const std::string& label) {
  const Ratio r = parse_ratio(label);
  return r.value();
}

std::vector<ModeCurve> curves_from_cells(const std::vector<EvalCell>& cells) {
  // (mode, ratio label) -> (correct, trials); mixed cells carry no single ratio.
  std::map<std::pair<PositionMode, std::string>, std::pair<std::int64_t, std::int64_t>> pooled;
  for (const EvalCell& c : cells) {
    if (c.cell.ratio == "all") continue;
    auto& [correct, trials] = pooled[{c.cell.mode, c.cell.ratio}];
    correct += c.correct;
    trials += c.trials;
  }
  std::vector<ModeCurve> curves;
  for (const auto& [key, totals] : pooled) {
    if (totals.second == 0) continue;
    if (curves.empty() || curves.back().mode != key.first) curves.push_back({key.first, {}});
    curves.back().points.push_back({ratio_value(key.second),
                                    static_cast<double>(totals.first) /
                                        static_cast<double>(totals.second),
                                    totals.second});
  }
  for (ModeCurve& curve : curves) {
    std::sort(curve.points.begin(), curve.points.end(),
              [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  }
  return curves;
}

std::vector<PsychometricPoint> pooled_points(const std::vector<EvalCell>& cells) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> pooled;
  for (const EvalCell& c : cells) {
    if (c.cell.ratio == "all") continue;
    auto& [correct, trials] = pooled[c.cell.ratio];
    correct += c.correct;
    trials += c.trials;
  }
  std::vector<PsychometricPoint> points;
  for (const auto& [label, totals] : pooled) {
    if (totals.second == 0) continue;
    points.push_back({ratio_value(label),
                      static_cast<double>(totals.first) / static_cast<double>(totals.second),
                      totals.second});
  }
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  return points;
}

GridReport aggregate(const std::vector<InstanceRecord>& records,
                     const std::vector<SubjectAnswer>& answers, std::string train, int precision) {
  std::map<std::string_view, const InstanceRecord*> by_id;
  for (const InstanceRecord& r : records) {
    if (!by_id.emplace(r.id, &r).second) {
      throw std::invalid_argument("duplicate record id '" + r.id + "'");
    }
  }
  GridReport report;
  report.train = std::move(train);
  report.precision = precision;
  std::map<CellRef, EvalCell> cells;
  std::map<std::string_view, bool> seen;
  for (const SubjectAnswer& a : answers) {
    const auto it = by_id.find(a.id);
    if (it == by_id.end()) throw MissingGroundTruth("no record for answer id '" + a.id + "'");
    const InstanceRecord& r = *it->second;
    if (!r.agreement) throw MissingGroundTruth("record '" + r.id + "' has no agreement value");
    if (!seen.emplace(r.id, true).second) {
      throw std::invalid_argument("duplicate answer for id '" + a.id + "'");
    }
    const bool correct = a.answer == *r.agreement;
    ++report.trials;
    report.correct += correct ? 1 : 0;
    if (!r.cell) continue;
    EvalCell& cell = cells[*r.cell];
    cell.train = report.train;
    cell.cell = *r.cell;
    ++cell.trials;
    cell.correct += correct ? 1 : 0;
  }
  for (auto& [key, cell] : cells) report.cells.push_back(std::move(cell));
  report.curves = curves_from_cells(report.cells);
  return report;
}

namespace {

// Table columns: mixed "all" then 1:2 ... 7:8, size-controlled then area-controlled.
constexpr std::array<const char*, 8> kColumns{"all", "1:2", "2:3", "3:4", "4:5", "5:6", "6:7", "7:8"};

struct TableRow {
  const char* train;
  PositionMode mode;
  std::array<int, 16> percent;
};

constexpr std::array<TableRow, 6> kTable{{
    {"Q-full", PositionMode::random,
     {92, 100, 99, 97, 94, 91, 88, 85, 93, 100, 99, 97, 93, 91, 86, 82}},
    {"Q-full", PositionMode::paired,
     {93, 99, 99, 96, 93, 90, 88, 82, 93, 99, 99, 96, 91, 87, 84, 80}},
    {"Q-full", PositionMode::partitioned,
     {89, 100, 99, 92, 90, 81, 77, 72, 89, 99, 98, 92, 88, 82, 78, 72}},
    {"Q-half", PositionMode::random,
     {92, 100, 100, 98, 93, 88, 88, 87, 93, 100, 100, 97, 92, 86, 85, 82}},
    {"Q-half", PositionMode::paired,
     {92, 100, 100, 96, 90, 86, 84, 79, 92, 100, 99, 96, 87, 84, 79, 76}},
    {"Q-half", PositionMode::partitioned,
     {91, 100, 99, 96, 86, 83, 83, 80, 91, 100, 99, 94, 89, 83, 83, 80}},
}};

struct CurveRow {
  PositionMode mode;
  std::array<double, 10> accuracy;  // n = 1 ... 10
};

constexpr std::array<CurveRow, 3> kCurves{{
    {PositionMode::random, {1.0, 0.99, 0.97, 0.94, 0.91, 0.88, 0.85, 0.79, 0.77, 0.73}},
    {PositionMode::paired, {0.99, 0.99, 0.96, 0.93, 0.90, 0.88, 0.82, 0.78, 0.78, 0.73}},
    {PositionMode::partitioned, {1.0, 0.99, 0.92, 0.90, 0.81, 0.77, 0.72, 0.69, 0.64, 0.61}},
}};

ReferenceFixtures build_fixtures() {
  ReferenceFixtures f;
  for (const TableRow& row : kTable) {
    for (std::size_t i = 0; i < row.percent.size(); ++i) {
      f.grid.push_back({row.train, CellRef{row.mode, i >= kColumns.size(), kColumns[i % 8]},
                        row.percent[i]});
    }
  }
  for (const CurveRow& row : kCurves) {
    for (std::size_t i = 0; i < row.accuracy.size(); ++i) {
      f.curves.push_back({row.mode, static_cast<int>(i) + 1, row.accuracy[i]});
    }
  }
  return f;
}

}  // namespace

int ReferenceFixtures::cell(const std::string& train, PositionMode mode, bool area_controlled,
                            const std::string& ratio) const {
  for (const ReferenceCell& c : grid) {
    if (c.train == train && c.cell == CellRef{mode, area_controlled, ratio}) {
      return c.accuracy_percent;
    }
  }
  throw std::out_of_range("no reference cell " + train + " " +
                          CellRef{mode, area_controlled, ratio}.label());
}

double ReferenceFixtures::curve_point(PositionMode mode, int n) const {
  for (const ReferenceCurvePoint& p : curves) {
    if (p.mode == mode && p.n == n) return p.accuracy;
  }
  throw std::out_of_range("no reference curve point for " + std::string(to_string(mode)) +
                          " at n = " + std::to_string(n));
}

std::vector<PsychometricPoint> ReferenceFixtures::points(PositionMode mode,
                                                         double max_ratio) const {
  std::vector<PsychometricPoint> out;
  for (const ReferenceCurvePoint& p : curves) {
    if (p.mode == mode && p.ratio() <= max_ratio + 1e-12) {
      out.push_back({p.ratio(), p.accuracy, trials});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
  return out;
}

Json ReferenceFixtures::to_json() const {
  Json j;
  j["trials"] = trials;
  Json& g = j["grid"] = Json::array();
  for (const ReferenceCell& c : grid) {
    g.push_back({{"train", c.train},
                 {"mode", to_string(c.cell.mode)},
                 {"area_controlled", c.cell.area_controlled},
                 {"ratio", c.cell.ratio},
                 {"accuracy", c.accuracy_percent}});
  }
  Json& cv = j["curves"] = Json::array();
  for (const ReferenceCurvePoint& p : curves) {
    cv.push_back({{"mode", to_string(p.mode)}, {"n", p.n}, {"accuracy", p.accuracy}});
  }
  return j;
}

std::string ReferenceFixtures::checksum() const {
  return sha256_hex(to_json().dump());
}

GridReport ReferenceFixtures::report(const std::string& train) const {
  GridReport r;
  r.train = train;
  r.precision = 0;
  for (const ReferenceCell& c : grid) {
    if (c.train != train) continue;
    // Published percentages are rounded; this recovers the nearest count.
    const auto correct = static_cast<std::int64_t>(std::llround(c.accuracy_percent * trials / 100.0));
    r.cells.push_back({train, c.cell, correct, trials});
    r.correct += correct;
    r.trials += trials;
  }
  if (r.cells.empty()) throw std::out_of_range("no reference grid for '" + train + "'");
  std::sort(r.cells.begin(), r.cells.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  for (const CurveRow& row : kCurves) {
    r.curves.push_back({row.mode, points(row.mode)});
  }
  return r;
}

const ReferenceFixtures& reference_fixtures() {
  static const ReferenceFixtures fixtures = build_fixtures();
  return fixtures;
}

ModeFit fit_points(std::string name, std::vector<PsychometricPoint> points) {
  ModeFit f;
  f.name = std::move(name);
  f.points = std::move(points);
  try {
    f.fit = fit_weber(f.points);
    f.threshold_75 = threshold_ratio(f.fit->w, 0.75);
  } catch (const DegenerateData& e) {
    f.error = std::string("DegenerateData: ") + e.what();
  }
  return f;
}

std::vector<ModeFit> fit_curves(const std::vector<ModeCurve>& curves) {
  std::vector<ModeFit> fits;
  for (const ModeCurve& curve : curves) {
    fits.push_back(fit_points(std::string(to_string(curve.mode)), curve.points));
  }
  return fits;
}

std::string grid_csv(const GridReport& report) {
  std::ostringstream out;
  out << "train,mode,area,ratio,accuracy,trials\n";
  out << std::fixed << std::setprecision(std::max(report.precision, 0));
  for (const EvalCell& c : report.cells) {
    out << c.train << ',' << to_string(c.cell.mode) << ','
        << (c.cell.area_controlled ? "area" : "size") << ',' << c.cell.ratio << ','
        << report.percent(c) << ',' << c.trials << '\n';
  }
  return out.str();
}

GridReport grid_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "train,mode,area,ratio,accuracy,trials") {
    throw std::invalid_argument("grid CSV must start with the header "
                                "train,mode,area,ratio,accuracy,trials");
  }
  GridReport report;
  report.cells.clear();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string field; std::getline(row, field, ',');) fields.push_back(field);
    if (fields.size() != 6) {
      throw std::invalid_argument("grid CSV line " + std::to_string(line_no) +
                                  ": expected 6 fields");
    }
    try {
      EvalCell c;
      c.train = fields[0];
      if (fields[2] != "size" && fields[2] != "area") throw std::invalid_argument("area flag");
      c.cell = {position_mode_from_string(fields[1]), fields[2] == "area", fields[3]};
      if (c.cell.ratio != "all") parse_ratio(c.cell.ratio);
      const double percent = std::stod(fields[4]);
      const auto dot = fields[4].find('.');
      report.precision = dot == std::string::npos ? 0 : static_cast<int>(fields[4].size() - dot - 1);
      c.trials = std::stoll(fields[5]);
      if (c.trials < 1 || percent < 0.0 || percent > 100.0) throw std::invalid_argument("range");
      c.correct = std::llround(percent / 100.0 * static_cast<double>(c.trials));
      report.train = c.train;
      report.correct += c.correct;
      report.trials += c.trials;
      report.cells.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  report.curves = curves_from_cells(report.cells);
  return report;
}

Json summary_json(const std::vector<ModeFit>& fits) {
  Json j = Json::object();
  for (const ModeFit& f : fits) {
    Json m;
    if (f.fit) {
      m["w"] = f.fit->w;
      m["threshold_75"] = std::isfinite(*f.threshold_75) ? Json(*f.threshold_75) : Json(nullptr);
      m["residual"] = f.fit->residual;
      if (f.fit->standard_error) m["stderr"] = *f.fit->standard_error;
    } else {
      m["w"] = nullptr;
      m["threshold_75"] = nullptr;
      m["residual"] = nullptr;
      m["error"] = f.error;
    }
    m["points"] = f.points.size();
    j[f.name] = std::move(m);
  }
  return j;
}

std::string render_svg(const std::vector<ModeFit>& fits, const std::string& title) {
  constexpr double kWidth = 640, kHeight = 420, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
  constexpr double kMinRatio = 1.0, kMaxRatio = 2.0, kMinAcc = 0.5, kMaxAcc = 1.0;
  const std::array<const char*, 3> palette{"#1f77b4", "#d62728", "#2ca02c"};
  auto px = [&](double r) {
    return kLeft + (r - kMinRatio) / (kMaxRatio - kMinRatio) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double a) {
    return kHeight - kBottom - (a - kMinAcc) / (kMaxAcc - kMinAcc) * (kHeight - kTop - kBottom);
  };
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  out << "<g stroke=\"#999\" stroke-width=\"1\">\n";
  for (double r = 1.0; r <= kMaxRatio + 1e-9; r += 0.25) {
    out << "<line x1=\"" << px(r) << "\" y1=\"" << py(kMinAcc) << "\" x2=\"" << px(r)
        << "\" y2=\"" << py(kMaxAcc) << "\" stroke-dasharray=\"2,3\"/>\n";
  }
  for (double a = 0.5; a <= kMaxAcc + 1e-9; a += 0.1) {
    out << "<line x1=\"" << px(kMinRatio) << "\" y1=\"" << py(a) << "\" x2=\"" << px(kMaxRatio)
        << "\" y2=\"" << py(a) << "\" stroke-dasharray=\"2,3\"/>\n";
  }
  out << "</g>\n";
  for (double r = 1.0; r <= kMaxRatio + 1e-9; r += 0.25) {
    out << "<text x=\"" << px(r) << "\" y=\"" << py(kMinAcc) + 16
        << "\" text-anchor=\"middle\">" << r << "</text>\n";
  }
  for (double a = 0.5; a <= kMaxAcc + 1e-9; a += 0.1) {
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(a) + 4 << "\" text-anchor=\"end\">" << a
        << "</text>\n";
  }
  out << "<text x=\"" << px(1.5) << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">ratio (larger / smaller)</text>\n";
  out << "<text transform=\"translate(16," << py(0.75) << ") rotate(-90)\" "
         "text-anchor=\"middle\">accuracy</text>\n";
  out << "<line x1=\"" << px(kMinRatio) << "\" y1=\"" << py(0.75) << "\" x2=\"" << px(kMaxRatio)
      << "\" y2=\"" << py(0.75) << "\" stroke=\"#555\"/>\n";

  for (std::size_t i = 0; i < fits.size(); ++i) {
    const ModeFit& f = fits[i];
    const char* color = palette[i % palette.size()];
    if (f.fit) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (int k = 0; k <= 200; ++k) {
        const double r = kMinRatio + (kMaxRatio - kMinRatio) * k / 200.0;
        out << px(r) << ',' << py(std::max(kMinAcc, ans_accuracy(r, f.fit->w))) << ' ';
      }
      out << "\"/>\n";
    }
    for (const PsychometricPoint& p : f.points) {
      if (p.ratio > kMaxRatio) continue;
      out << "<circle cx=\"" << px(p.ratio) << "\" cy=\"" << py(std::max(kMinAcc, p.accuracy))
          << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 20.0 * static_cast<double>(i);
    out << "<rect x=\"" << kWidth - kRight + 15 << "\" y=\"" << ly << "\" width=\"12\" "
        << "height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << ly + 10 << "\">"
        << f.name;
    if (f.fit) out << " w=" << std::setprecision(3) << f.fit->w << std::setprecision(2);
    out << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace quantiscene
