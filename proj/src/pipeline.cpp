#include "quantiscene/pipeline.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "quantiscene/checksum.hpp"
#include "quantiscene/errors.hpp"
#include "quantiscene/rng.hpp"

namespace quantiscene {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DatasetError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string describe(const SubjectSpec& subject) {
  if (const auto* builtin = std::get_if<SubjectKind>(&subject)) return to_string(*builtin);
  return "cmd:" + std::get<ExternalSubject>(subject).command;
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

std::string default_run_id(const std::string& subject) {
  std::string id;
  for (char c : subject) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
    id += keep ? c : '-';
  }
  // Long external commands keep a readable head plus a digest for uniqueness.
  if (id.size() > 48) id = id.substr(0, 32) + "-" + sha256_hex(subject).substr(0, 12);
  return id;
}

void write_answers(const fs::path& dataset_dir, const AnswerSet& set) {
  const fs::path dir = dataset_dir / "answers";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DatasetError("cannot create " + dir.string() + ": " + ec.message());
  std::string lines;
  for (const SubjectAnswer& a : set.answers) {
    Json j;
    j["id"] = a.id;
    j["answer"] = a.answer;
    lines += j.dump();
    lines += '\n';
  }
  write_text(dir / (set.run_id + ".jsonl"), lines);
  Json meta;
  meta["run_id"] = set.run_id;
  meta["subject"] = set.subject;
  meta["subject_seed"] = set.subject_seed;
  meta["answers"] = set.answers.size();
  meta["cursor"] = set.cursor;
  meta["complete"] = set.complete;
  if (!set.error.empty()) meta["error"] = set.error;
  write_text(dir / (set.run_id + ".json"), meta.dump(2) + "\n");
}

AnswerSet read_answers(const fs::path& dataset_dir, const std::string& run_id) {
  const fs::path dir = dataset_dir / "answers";
  AnswerSet set;
  try {
    const Json meta = Json::parse(read_text(dir / (run_id + ".json")));
    set.run_id = meta.at("run_id").get<std::string>();
    set.subject = meta.at("subject").get<std::string>();
    set.subject_seed = meta.at("subject_seed").get<std::uint64_t>();
    set.cursor = meta.at("cursor").get<std::size_t>();
    set.complete = meta.at("complete").get<bool>();
    set.error = meta.value("error", std::string());
  } catch (const DatasetError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetError((dir / (run_id + ".json")).string() + ": " + e.what());
  }
  std::istringstream in(read_text(dir / (run_id + ".jsonl")));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      set.answers.push_back(parse_response(line));
    } catch (const std::exception& e) {
      throw DatasetError((dir / (run_id + ".jsonl")).string() + ":" + std::to_string(line_no) +
                         ": " + e.what());
    }
  }
  return set;
}

std::uint64_t default_subject_seed(std::uint64_t master_seed, const SubjectKind& subject) {
  return seed_for(master_seed, "subject:" + to_string(subject), 0);
}

AnswerSet run_subject(const SubjectSpec& subject, const Dataset& dataset,
                      std::uint64_t subject_seed, unsigned threads,
                      const std::optional<AnswerSet>& resume) {
  AnswerSet set;
  set.subject = describe(subject);
  set.run_id = resume ? resume->run_id : default_run_id(set.subject);
  set.subject_seed = subject_seed;
  if (resume) {
    if (resume->subject != set.subject) {
      throw std::invalid_argument("cannot resume a run of '" + resume->subject + "' with '" +
                                  set.subject + "'");
    }
    set.answers = resume->answers;
    set.cursor = resume->cursor;
    set.subject_seed = resume->subject_seed;
  }
  if (set.cursor > dataset.records.size()) {
    throw std::invalid_argument("resume cursor beyond the dataset");
  }
  if (const auto* builtin = std::get_if<SubjectKind>(&subject)) {
    const std::vector<InstanceRecord> rest(
        dataset.records.begin() + static_cast<std::ptrdiff_t>(set.cursor), dataset.records.end());
    for (SubjectAnswer& a : run_builtin(*builtin, rest, set.subject_seed, threads)) {
      set.answers.push_back(std::move(a));
    }
    set.cursor = dataset.records.size();
    set.complete = true;
    return set;
  }
  ExternalOptions options = std::get<ExternalSubject>(subject).options;
  if (options.image_root.empty()) options.image_root = fs::absolute(dataset.root);
  SubjectRun run =
      run_external(std::get<ExternalSubject>(subject).command, dataset.records, options, set.cursor);
  for (SubjectAnswer& a : run.answers) set.answers.push_back(std::move(a));
  set.cursor = run.cursor;
  set.complete = run.complete();
  if (run.error) {
    try {
      std::rethrow_exception(run.error);
    } catch (const std::exception& e) {
      set.error = e.what();
    }
  }
  return set;
}

PipelineResult write_report(const std::vector<GridReport>& grids, const fs::path& out_dir,
                            const std::string& title) {
  if (grids.empty()) throw std::invalid_argument("nothing to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DatasetError("cannot create " + out_dir.string() + ": " + ec.message());

  PipelineResult result;
  result.grid = grids.front();
  std::string csv;
  for (const GridReport& g : grids) {
    const std::string part = grid_csv(g);
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
  }
  result.fits = fit_curves(result.grid.curves);
  result.pooled = fit_points("pooled", pooled_points(result.grid.cells));

  Json summary;
  summary["title"] = title;
  summary["train"] = result.grid.train;
  summary["trials"] = result.grid.trials;
  summary["accuracy"] = result.grid.trials > 0 ? Json(static_cast<double>(result.grid.correct) /
                                                      static_cast<double>(result.grid.trials))
                                               : Json(nullptr);
  summary["modes"] = summary_json(result.fits);
  summary["pooled"] = summary_json({result.pooled})["pooled"];

  const fs::path csv_path = out_dir / "grid.csv";
  const fs::path json_path = out_dir / "summary.json";
  const fs::path svg_path = out_dir / "curves.svg";
  write_text(csv_path, csv);
  write_text(json_path, summary.dump(2) + "\n");
  write_text(svg_path, render_svg(result.fits, title));
  result.files = {csv_path, json_path, svg_path};
  return result;
}

PipelineResult pipeline_report(const PipelineConfig& config) {
  if (config.from_fixtures) {
    const ReferenceFixtures& fixtures = reference_fixtures();
    const std::vector<GridReport> grids =
        stage("fixtures", [&] { return std::vector{fixtures.report("Q-full"), fixtures.report("Q-half")}; });
    // The grid CSV lists both training regimes; the mode curves are the Q-full ratio sweep.
    return stage("report", [&] { return write_report(grids, config.out_dir, "reference curves"); });
  }

  std::vector<InstanceRecord> records =
      stage("gen-eval", [&] { return generate_eval_records(config.grid, config.threads); });
  const bool external = std::holds_alternative<ExternalSubject>(config.subject);
  Dataset dataset;
  dataset.records = std::move(records);
  dataset.root = config.out_dir / "dataset";
  if (config.write_dataset || external) {
    stage("write-dataset", [&] {
      DatasetOptions options;
      options.master_seed = config.grid.master_seed;
      options.grid = to_json(config.grid);
      options.raster = config.raster;
      options.threads = config.threads;
      return write_dataset(dataset.records, dataset.root, options);
    });
  }

  const std::uint64_t subject_seed =
      config.subject_seed
          ? *config.subject_seed
          : (external ? config.grid.master_seed
                      : default_subject_seed(config.grid.master_seed,
                                             std::get<SubjectKind>(config.subject)));
  const AnswerSet answers = stage("run-subject", [&] {
    AnswerSet set = run_subject(config.subject, dataset, subject_seed, config.threads);
    if (config.write_dataset || external) write_answers(dataset.root, set);
    if (!set.complete) {
      throw std::runtime_error(set.error + " (answered " + std::to_string(set.cursor) + " of " +
                               std::to_string(dataset.records.size()) + ")");
    }
    return set;
  });
  const GridReport grid = stage("aggregate", [&] {
    return aggregate(dataset.records, answers.answers, answers.subject);
  });
  return stage("report", [&] {
    return write_report({grid}, config.out_dir, "subject " + answers.subject);
  });
}

}  // namespace quantiscene
