// quantiscene: generate quantifier datasets, run subjects, aggregate and fit.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quantiscene/dataset.hpp"
#include "quantiscene/errors.hpp"
#include "quantiscene/pipeline.hpp"
#include "quantiscene/protocol.hpp"
#include "quantiscene/psychometrics.hpp"

namespace fs = std::filesystem;
using namespace quantiscene;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitIncomplete = 3;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DatasetError("cannot write " + path.string());
}

/// Environment beats --seed, which beats the config file.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t configured) {
  return master_seed_from_env(flag.value_or(configured));
}

struct RasterFlags {
  int resolution = 64;
  bool antialias = false;

  void attach(CLI::App* app) {
    app->add_option("--resolution", resolution, "image side in pixels")->check(CLI::Range(16, 4096));
    app->add_flag("--antialias", antialias, "4x4 supersampling");
  }
  RasterConfig config() const {
    RasterConfig r;
    r.resolution = resolution;
    r.antialias = antialias ? Antialias::supersample_4x : Antialias::none;
    return r;
  }
};

struct SubjectFlags {
  std::string subject;
  std::string command;
  std::size_t batch_size = 64;
  double timeout_seconds = 60.0;

  void attach(CLI::App* app) {
    auto* s = app->add_option("--subject", subject, "exact | ans:<w> | pairing:<radius>");
    auto* c = app->add_option("--cmd", command, "external subject command (line protocol)");
    s->excludes(c);
    app->add_option("--batch-size", batch_size, "requests per external batch")
        ->check(CLI::PositiveNumber);
    app->add_option("--timeout", timeout_seconds, "seconds allowed per external batch")
        ->check(CLI::PositiveNumber);
  }
  bool given() const { return !subject.empty() || !command.empty(); }
  SubjectSpec spec() const {
    if (!command.empty()) {
      ExternalOptions options;
      options.batch_size = batch_size;
      options.batch_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_seconds * 1000));
      return ExternalSubject{command, options};
    }
    if (subject.empty()) throw CLI::ValidationError("--subject or --cmd", "one of them is required");
    return parse_subject(subject);
  }
};

std::uint64_t subject_seed_for(const SubjectSpec& spec, std::optional<std::uint64_t> flag,
                               std::uint64_t master) {
  if (flag) return *flag;
  if (const auto* builtin = std::get_if<SubjectKind>(&spec)) {
    return default_subject_seed(master, *builtin);
  }
  return master;
}

void print_fits(const PipelineResult& result) {
  for (const ModeFit& f : result.fits) {
    std::cout << "  " << f.name << ": ";
    if (f.fit) {
      std::cout << "w = " << f.fit->w << ", 75% threshold ratio = " << *f.threshold_75 << "\n";
    } else {
      std::cout << f.error << "\n";
    }
  }
  if (result.pooled.fit) {
    std::cout << "  pooled: w = " << result.pooled.fit->w << "\n";
  } else if (!result.pooled.error.empty()) {
    std::cout << "  pooled: " << result.pooled.error << "\n";
  }
  for (const fs::path& p : result.files) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled quantifier scenes, simulated subjects and psychometric fits"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // gen-train
  auto* gen_train = app.add_subcommand("gen-train", "generate a training dataset");
  std::string captioner = "q_full";
  int images = 4096;
  TrainConfig train;
  std::optional<std::uint64_t> seed_flag;
  fs::path out_dir;
  RasterFlags raster;
  std::string collision = "none_allowed";
  gen_train->add_option("--captioner", captioner, "q_full | q_half")
      ->check(CLI::IsMember({"q_full", "q_half"}));
  gen_train->add_option("--images", images, "number of images")->check(CLI::PositiveNumber);
  gen_train->add_option("--captions-per-image", train.captions_per_image)->check(CLI::PositiveNumber);
  gen_train->add_option("--max-objects", train.max_objects)->check(CLI::Range(2, 64));
  gen_train->add_option("--collision", collision)
      ->check(CLI::IsMember({"none_allowed", "overlap_quarter"}));
  gen_train->add_option("--seed", seed_flag, "master seed");
  gen_train->add_option("--out", out_dir)->required();
  raster.attach(gen_train);

  // gen-eval
  auto* gen_eval = app.add_subcommand("gen-eval", "generate the evaluation grid");
  fs::path config_path;
  std::string preset = "standard";
  std::optional<int> instances;
  bool no_images = false;
  gen_eval->add_option("--config", config_path, "grid config JSON")->check(CLI::ExistingFile);
  gen_eval->add_option("--preset", preset, "standard | extended")
      ->check(CLI::IsMember({"standard", "extended"}));
  gen_eval->add_option("--instances", instances, "instances per cell")->check(CLI::PositiveNumber);
  gen_eval->add_option("--seed", seed_flag, "master seed");
  gen_eval->add_option("--out", out_dir)->required();
  gen_eval->add_flag("--no-images", no_images, "skip PNG rendering");
  raster.attach(gen_eval);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "answer a dataset with a subject");
  fs::path dataset_dir;
  SubjectFlags subject;
  std::string run_id;
  bool resume = false;
  std::optional<std::uint64_t> subject_seed_flag;
  simulate->add_option("--dataset", dataset_dir)->required()->check(CLI::ExistingDirectory);
  subject.attach(simulate);
  simulate->add_option("--run-id", run_id, "name of the answer set");
  simulate->add_option("--subject-seed", subject_seed_flag, "seed of the built-in subject");
  simulate->add_flag("--resume", resume, "continue an interrupted run");

  // aggregate
  auto* aggregate_cmd = app.add_subcommand("aggregate", "score an answer set into a grid CSV");
  int precision = 1;
  fs::path out_file;
  aggregate_cmd->add_option("--dataset", dataset_dir)->required()->check(CLI::ExistingDirectory);
  aggregate_cmd->add_option("--run-id", run_id)->required();
  aggregate_cmd->add_option("--precision", precision, "decimal places")->check(CLI::Range(0, 6));
  aggregate_cmd->add_option("--out", out_file, "CSV path (default: stdout)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit Weber fractions to a grid CSV");
  fs::path csv_path;
  bool fit_fixtures = false;
  fit_cmd->add_option("--csv", csv_path)->check(CLI::ExistingFile);
  fit_cmd->add_flag("--from-fixtures", fit_fixtures, "fit the bundled reference curves");
  fit_cmd->add_option("--out", out_file, "summary JSON path (default: stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "full pipeline: generate, answer, fit, plot");
  bool from_fixtures = false;
  bool keep_dataset = false;
  report_cmd->add_flag("--from-fixtures", from_fixtures, "report on the bundled reference data");
  report_cmd->add_option("--dataset", dataset_dir, "report on an existing answered dataset")
      ->check(CLI::ExistingDirectory);
  report_cmd->add_option("--run-id", run_id, "answer set for --dataset");
  report_cmd->add_option("--config", config_path, "grid config JSON")->check(CLI::ExistingFile);
  report_cmd->add_option("--preset", preset, "standard | extended")
      ->check(CLI::IsMember({"standard", "extended"}));
  report_cmd->add_option("--instances", instances, "instances per cell")->check(CLI::PositiveNumber);
  report_cmd->add_option("--seed", seed_flag, "master seed");
  report_cmd->add_option("--subject-seed", subject_seed_flag, "seed of the built-in subject");
  report_cmd->add_flag("--keep-dataset", keep_dataset, "write the generated dataset too");
  report_cmd->add_option("--out", out_dir)->required();
  subject.attach(report_cmd);
  raster.attach(report_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "re-check every dataset invariant");
  verify_cmd->add_option("--dataset", dataset_dir)->required()->check(CLI::ExistingDirectory);

  // subject
  auto* serve_cmd = app.add_subcommand(
      "subject", "serve a built-in subject over the line protocol on stdin/stdout");
  serve_cmd->add_option("--subject", subject.subject)->required();
  serve_cmd->add_option("--dataset", dataset_dir)->required()->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--subject-seed", subject_seed_flag);

  CLI11_PARSE(app, argc, argv);

  auto load_grid = [&]() {
    GridConfig grid = preset == "extended" ? GridConfig::extended() : GridConfig::standard();
    if (!config_path.empty()) grid = grid_from_json(Json::parse(read_text(config_path)));
    if (instances) grid.instances_per_cell = *instances;
    grid.master_seed = resolve_seed(seed_flag, grid.master_seed);
    return grid;
  };

  try {
    if (gen_train->parsed()) {
      TrainGenConfig config;
      config.images = images;
      config.train = train;
      config.train.captioner = captioner_from_string(captioner);
      config.train.collision = collision == "none_allowed" ? CollisionPolicy::none_allowed
                                                           : CollisionPolicy::overlap_quarter;
      config.master_seed = resolve_seed(seed_flag, kDefaultMasterSeed);
      const auto records = generate_train_records(config, threads);
      DatasetOptions options;
      options.split = "train";
      options.master_seed = config.master_seed;
      options.captioner = captioner;
      options.raster = raster.config();
      options.threads = threads;
      const DatasetManifest m = write_dataset(records, out_dir, options);
      std::cout << "wrote " << m.splits.front().images << " images and " << records.size()
                << " records to " << out_dir.string() << "\n";
    } else if (gen_eval->parsed()) {
      const GridConfig grid = load_grid();
      const auto records = generate_eval_records(grid, threads);
      DatasetOptions options;
      options.master_seed = grid.master_seed;
      options.grid = to_json(grid);
      options.raster = raster.config();
      options.write_images = !no_images;
      options.threads = threads;
      write_dataset(records, out_dir, options);
      std::cout << "wrote " << grid.cells.size() << " cells x " << grid.instances_per_cell
                << " instances to " << out_dir.string() << "\n";
    } else if (simulate->parsed()) {
      const Dataset dataset = read_dataset(dataset_dir);
      const SubjectSpec spec = subject.spec();
      std::optional<AnswerSet> previous;
      const std::string id = run_id.empty() ? default_run_id(subject.command.empty()
                                                                 ? to_string(std::get<SubjectKind>(spec))
                                                                 : "cmd:" + subject.command)
                                            : run_id;
      if (resume) previous = read_answers(dataset_dir, id);
      AnswerSet set = run_subject(spec, dataset,
                                  subject_seed_for(spec, subject_seed_flag, dataset.manifest.master_seed),
                                  threads, previous);
      set.run_id = id;
      write_answers(dataset_dir, set);
      std::cout << "answered " << set.cursor << " of " << dataset.records.size()
                << " records (run " << set.run_id << ")\n";
      if (!set.complete) {
        std::cerr << "subject stopped early: " << set.error << "\nresume with --resume --run-id "
                  << set.run_id << "\n";
        return kExitIncomplete;
      }
    } else if (aggregate_cmd->parsed()) {
      const Dataset dataset = read_dataset(dataset_dir);
      const AnswerSet set = read_answers(dataset_dir, run_id);
      const GridReport grid = aggregate(dataset.records, set.answers, set.subject, precision);
      const std::string csv = grid_csv(grid);
      if (out_file.empty()) {
        std::cout << csv;
      } else {
        write_text(out_file, csv);
      }
    } else if (fit_cmd->parsed()) {
      std::vector<ModeCurve> curves;
      if (fit_fixtures) {
        curves = reference_fixtures().report("Q-full").curves;
      } else if (!csv_path.empty()) {
        curves = grid_from_csv(read_text(csv_path)).curves;
      } else {
        throw CLI::ValidationError("fit", "--csv or --from-fixtures is required");
      }
      const std::string text = summary_json(fit_curves(curves)).dump(2) + "\n";
      if (out_file.empty()) {
        std::cout << text;
      } else {
        write_text(out_file, text);
      }
    } else if (report_cmd->parsed()) {
      PipelineResult result;
      if (from_fixtures) {
        PipelineConfig config;
        config.from_fixtures = true;
        config.out_dir = out_dir;
        result = pipeline_report(config);
      } else if (!dataset_dir.empty()) {
        if (run_id.empty()) throw CLI::ValidationError("report", "--dataset needs --run-id");
        const Dataset dataset = read_dataset(dataset_dir);
        const AnswerSet set = read_answers(dataset_dir, run_id);
        result = write_report({aggregate(dataset.records, set.answers, set.subject)}, out_dir,
                              "subject " + set.subject);
      } else {
        PipelineConfig config;
        config.grid = load_grid();
        config.subject = subject.given() ? subject.spec() : SubjectSpec{SubjectKind{ExactCounter{}}};
        config.subject_seed = subject_seed_flag;
        config.out_dir = out_dir;
        config.threads = threads;
        config.raster = raster.config();
        config.write_dataset = keep_dataset;
        result = pipeline_report(config);
      }
      print_fits(result);
    } else if (verify_cmd->parsed()) {
      const VerifyReport report = verify_dataset(dataset_dir, threads);
      std::cout << "checked " << report.records << " records and " << report.images
                << " images\n";
      for (const std::string& p : report.problems) std::cout << "FAIL " << p << "\n";
      if (!report.ok()) return kExitIncomplete;
      std::cout << "all invariants hold\n";
    } else if (serve_cmd->parsed()) {
      const Dataset dataset = read_dataset(dataset_dir, false);
      std::map<std::string, const InstanceRecord*> by_id;
      for (const InstanceRecord& r : dataset.records) by_id.emplace(r.id, &r);
      const SubjectKind kind = parse_subject(subject.subject);
      serve_builtin(kind, by_id,
                    subject_seed_flag.value_or(
                        default_subject_seed(dataset.manifest.master_seed, kind)),
                    std::cin, std::cout, std::cerr);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
