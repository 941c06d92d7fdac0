#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quantiscene/generator.hpp"
#include "quantiscene/json_fwd.hpp"
#include "quantiscene/record.hpp"

namespace quantiscene {

/// Discrimination accuracy observed at ratio = larger/smaller count.
struct PsychometricPoint {
  double ratio = 2.0;
  double accuracy = 1.0;
  std::int64_t trials = 1;
  friend bool operator==(const PsychometricPoint&, const PsychometricPoint&) = default;
};

/// Throws std::invalid_argument unless ratio > 1, accuracy in [0, 1], trials >= 1.
void validate(const PsychometricPoint& point);

struct WeberFit {
  double w = 1.0;
  /// Trial-weighted sum of squared accuracy errors at w.
  double residual = 0.0;
  /// Parametric bootstrap standard error, when requested.
  std::optional<double> standard_error;
};

inline constexpr double kWeberLowerBound = 1.001;
inline constexpr double kWeberUpperBound = 3.0;

/// Minimizes sum_i trials_i * (accuracy_i - ans_accuracy(ratio_i, w))^2 over
/// w in (1.001, 3.0] to |dw| <= 1e-6. Throws DegenerateData with fewer than three
/// points, or when every accuracy is >= 0.99 or every accuracy is <= 0.5.
WeberFit fit_weber(const std::vector<PsychometricPoint>& points);

/// Standard deviation of fitted w over `repetitions` binomial resamples of the
/// points at their own accuracies. Resample k uses derive_seed(seed, k).
double bootstrap_weber_stderr(const std::vector<PsychometricPoint>& points, int repetitions,
                              std::uint64_t seed);

/// The r >= 1 with ans_accuracy(r, w) = level, to |dr| <= 1e-6. Returns 1 at
/// level 0.5 and +infinity for levels the curve never reaches.
double threshold_ratio(double w, double level = 0.75);

struct SubjectAnswer {
  std::string id;
  bool answer = false;
  friend bool operator==(const SubjectAnswer&, const SubjectAnswer&) = default;
};

struct EvalCell {
  std::string train;
  CellRef cell;
  std::int64_t correct = 0;
  std::int64_t trials = 0;

  double accuracy() const noexcept {
    return trials > 0 ? static_cast<double>(correct) / static_cast<double>(trials) : 0.0;
  }
};

/// Accuracy-vs-ratio points of one positioning mode.
struct ModeCurve {
  PositionMode mode = PositionMode::random;
  std::vector<PsychometricPoint> points;
};

struct GridReport {
  std::string train = "subject";
  /// Decimal places of reported percentages.
  int precision = 1;
  /// Ordered by cell.
  std::vector<EvalCell> cells;
  /// Single-ratio cells pooled across area flags, ordered by mode then ratio.
  std::vector<ModeCurve> curves;
  /// All answered records, including ones outside the grid.
  std::int64_t correct = 0;
  std::int64_t trials = 0;

  /// 100 * correct / trials rounded to `precision` decimals.
  double percent(const EvalCell& cell) const;
  const EvalCell* find(const CellRef& cell) const;
};

/// Joins answers to records by id and scores them against the agreement values.
/// Throws MissingGroundTruth when an answer has no record or the record has no
/// agreement; records without answers are skipped.
GridReport aggregate(const std::vector<InstanceRecord>& records,
                     const std::vector<SubjectAnswer>& answers, std::string train = "subject",
                     int precision = 1);

/// Rebuilds the per-mode curves from cell totals.
std::vector<ModeCurve> curves_from_cells(const std::vector<EvalCell>& cells);
/// Single-ratio cells pooled across modes and area flags.
std::vector<PsychometricPoint> pooled_points(const std::vector<EvalCell>& cells);

/// Ratio value large/small of a "small:large" label.
double ratio_value(const std::string& label);

struct ReferenceCell {
  std::string train;  ///< "Q-full" or "Q-half"
  CellRef cell;
  int accuracy_percent = 0;
};

/// Accuracy at the n:(n+1) contrast, plotted against n.
struct ReferenceCurvePoint {
  PositionMode mode = PositionMode::random;
  int n = 1;
  double accuracy = 0.0;
  double ratio() const noexcept { return static_cast<double>(n + 1) / n; }
};

/// Published accuracy table of the FiLM model and its accuracy-vs-ratio curves.
struct ReferenceFixtures {
  std::vector<ReferenceCell> grid;
  std::vector<ReferenceCurvePoint> curves;
  /// Instances behind every published cell and point.
  int trials = 1024;

  /// Throws std::out_of_range for unknown cells.
  int cell(const std::string& train, PositionMode mode, bool area_controlled,
           const std::string& ratio) const;
  double curve_point(PositionMode mode, int n) const;
  /// Curve points with ratio <= max_ratio as psychometric points.
  std::vector<PsychometricPoint> points(PositionMode mode, double max_ratio = 1.5) const;
  /// Canonical JSON form; the checksum covers exactly this.
  Json to_json() const;
  /// Hex SHA-256 of to_json().dump().
  std::string checksum() const;
  /// The grid of one training regime as a report, for the CSV writer.
  GridReport report(const std::string& train) const;
};

const ReferenceFixtures& reference_fixtures();

/// Fit and 75% threshold of one curve, or the reason no fit exists.
struct ModeFit {
  std::string name;
  std::vector<PsychometricPoint> points;
  std::optional<WeberFit> fit;
  std::optional<double> threshold_75;
  std::string error;
};

/// DegenerateData is recorded in `error` rather than thrown.
ModeFit fit_points(std::string name, std::vector<PsychometricPoint> points);
std::vector<ModeFit> fit_curves(const std::vector<ModeCurve>& curves);

/// Header: train,mode,area,ratio,accuracy,trials. Accuracy in percent.
std::string grid_csv(const GridReport& report);
/// Parses grid_csv output; correct counts are recovered from the rounded percentages.
GridReport grid_from_csv(const std::string& text);

/// {"<name>": {"w", "threshold_75", "residual", "points"}} with null w and an
/// "error" entry for degenerate curves.
Json summary_json(const std::vector<ModeFit>& fits);

/// Accuracy-vs-ratio plot with fitted curves overlaid.
std::string render_svg(const std::vector<ModeFit>& fits, const std::string& title);

}  // namespace quantiscene
