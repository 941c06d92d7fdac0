#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quantiscene/dataset.hpp"
#include "quantiscene/protocol.hpp"
#include "quantiscene/psychometrics.hpp"
#include "quantiscene/subjects.hpp"

namespace quantiscene {

struct ExternalSubject {
  std::string command;
  ExternalOptions options;
};

using SubjectSpec = std::variant<SubjectKind, ExternalSubject>;

/// Answers of one subject on one dataset, persisted under answers/<run_id>.
struct AnswerSet {
  std::string run_id;
  std::string subject;
  std::uint64_t subject_seed = 0;
  std::vector<SubjectAnswer> answers;
  /// Records answered so far, in dataset order.
  std::size_t cursor = 0;
  bool complete = false;
  /// Why the run stopped early.
  std::string error;
};

/// Run id derived from the subject description: "exact", "ans-1.11", ...
std::string default_run_id(const std::string& subject);

/// Writes answers/<run_id>.jsonl ({"id", "answer"} per line) and
/// answers/<run_id>.json (run metadata) below `dataset_dir`.
void write_answers(const std::filesystem::path& dataset_dir, const AnswerSet& answers);
AnswerSet read_answers(const std::filesystem::path& dataset_dir, const std::string& run_id);

/// Default seed of a built-in subject for a given master seed.
std::uint64_t default_subject_seed(std::uint64_t master_seed, const SubjectKind& subject);

/// Runs a subject on the dataset's records starting at `resume.cursor` when a
/// previous partial run is given. External runs that stop early return an
/// incomplete AnswerSet instead of throwing.
AnswerSet run_subject(const SubjectSpec& subject, const Dataset& dataset,
                      std::uint64_t subject_seed, unsigned threads = 0,
                      const std::optional<AnswerSet>& resume = std::nullopt);

struct PipelineConfig {
  GridConfig grid = GridConfig::standard();
  SubjectSpec subject = SubjectKind{ExactCounter{}};
  /// Defaults to default_subject_seed(grid.master_seed, subject).
  std::optional<std::uint64_t> subject_seed;
  std::filesystem::path out_dir = "report";
  unsigned threads = 0;
  RasterConfig raster;
  /// Writes the generated dataset (with images) under out_dir/dataset. Always
  /// on for external subjects, which need the images.
  bool write_dataset = false;
  /// Reports on the bundled reference data instead of running a subject.
  bool from_fixtures = false;
};

struct PipelineResult {
  GridReport grid;
  std::vector<ModeFit> fits;
  ModeFit pooled;
  std::vector<std::filesystem::path> files;
};

/// gen-eval -> run_subject -> aggregate -> fit_weber -> threshold_ratio, then
/// writes grid.csv, summary.json and curves.svg into out_dir. Failures surface
/// as StageError naming the stage.
PipelineResult pipeline_report(const PipelineConfig& config);

/// Writes grid.csv, summary.json and curves.svg for an aggregated grid.
PipelineResult write_report(const std::vector<GridReport>& grids,
                            const std::filesystem::path& out_dir, const std::string& title);

}  // namespace quantiscene
