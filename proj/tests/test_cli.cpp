#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>

#include "quantiscene/json_fwd.hpp"
#include "test_util.hpp"

using testutil::TempDir;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell with QUANTISCENE_SEED cleared unless `env` sets it.
Outcome cli(const std::string& args, const std::string& env = "") {
  const std::string command = "env -u QUANTISCENE_SEED " + env + " " + QUANTISCENE_CLI_PATH +
                              " --threads 2 " + args + " 2>&1";
  Outcome o;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  for (std::size_t n; (n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0;) o.out.append(buffer, n);
  const int raw = ::pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

quantiscene::Json manifest(const std::filesystem::path& dir) {
  return quantiscene::Json::parse(testutil::slurp(dir / "manifest.json"));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    CHECK(cli("--help").status == 0);
    CHECK(cli("").status != 0);
    CHECK(cli("frobnicate").status != 0);
    CHECK(cli("gen-eval --out /tmp/x --instances 0").status != 0);
    CHECK(cli("simulate --dataset /nonexistent --subject exact").status != 0);
  }

  TEST_CASE("gen-eval, simulate, aggregate, verify") {
    TempDir dir("cli-eval");
    const auto data = dir / "data";
    const Outcome gen = cli("gen-eval --preset standard --instances 2 --seed 5 --out " + q(data));
    INFO(gen.out);
    REQUIRE(gen.status == 0);
    CHECK(manifest(data).at("master_seed") == 5);
    CHECK(std::filesystem::exists(data / "eval/000095.png"));

    REQUIRE(cli("simulate --dataset " + q(data) + " --subject exact").status == 0);
    CHECK(std::filesystem::exists(data / "answers/exact.jsonl"));
    const Outcome agg = cli("aggregate --dataset " + q(data) + " --run-id exact --precision 0");
    REQUIRE(agg.status == 0);
    CHECK(agg.out.rfind("train,mode,area,ratio,accuracy,trials\n", 0) == 0);
    CHECK(agg.out.find(",100,2\n") != std::string::npos);
    CHECK(agg.out.find(",50,") == std::string::npos);

    const std::string serve = std::string(QUANTISCENE_CLI_PATH) + " subject --subject exact --dataset " + q(data);
    const Outcome ext = cli("simulate --dataset " + q(data) + " --run-id served --batch-size 7 --cmd \"" + serve + "\"");
    INFO(ext.out);
    REQUIRE(ext.status == 0);
    CHECK(testutil::slurp(data / "answers/served.jsonl") == testutil::slurp(data / "answers/exact.jsonl"));

    const Outcome verify = cli("verify --dataset " + q(data));
    INFO(verify.out);
    CHECK(verify.status == 0);
    std::string png = testutil::slurp(data / "eval/000001.png");
    png[png.size() / 2] ^= 1;
    testutil::spit(data / "eval/000001.png", png);
    CHECK(cli("verify --dataset " + q(data)).status == 3);
  }

  TEST_CASE("an interrupted external run exits 3 and resumes") {
    TempDir dir("cli-resume");
    const auto data = dir / "data";
    REQUIRE(cli("gen-eval --preset standard --instances 1 --seed 8 --no-images --out " + q(data)).status == 0);
    const std::string cmd = std::string("--cmd \"") + FAKE_SUBJECT_PATH + " die-after 20\" --batch-size 8 --run-id r";
    const Outcome first = cli("simulate --dataset " + q(data) + " " + cmd);
    CHECK(first.status == 3);
    Outcome next = first;
    for (int i = 0; i < 5 && next.status == 3; ++i) next = cli("simulate --resume --dataset " + q(data) + " " + cmd);
    CHECK(next.status == 0);
    const Outcome agg = cli("aggregate --dataset " + q(data) + " --run-id r");
    CHECK(agg.status == 0);
  }

  TEST_CASE("QUANTISCENE_SEED overrides the seed flag") {
    TempDir dir("cli-seed");
    const std::string args = "gen-eval --preset standard --instances 1 --seed 5 --no-images --out ";
    REQUIRE(cli(args + q(dir / "a"), "QUANTISCENE_SEED=99").status == 0);
    REQUIRE(cli(args + q(dir / "b")).status == 0);
    CHECK(manifest(dir / "a").at("master_seed") == 99);
    CHECK(manifest(dir / "b").at("master_seed") == 5);
    CHECK(testutil::slurp(dir / "a/records.jsonl") != testutil::slurp(dir / "b/records.jsonl"));
    REQUIRE(cli(args + q(dir / "c"), "QUANTISCENE_SEED=99").status == 0);
    CHECK(testutil::slurp(dir / "a/records.jsonl") == testutil::slurp(dir / "c/records.jsonl"));
  }

  TEST_CASE("gen-train writes images times captions records") {
    TempDir dir("cli-train");
    const Outcome o = cli("gen-train --captioner q_half --images 12 --captions-per-image 5 --seed 3 --out " + q(dir / "t"));
    INFO(o.out);
    REQUIRE(o.status == 0);
    const auto m = manifest(dir / "t");
    CHECK(m.at("splits").at(0).at("images") == 12);
    CHECK(m.at("splits").at(0).at("records") == 60);
    CHECK(m.at("captioner") == "q_half");
  }

  TEST_CASE("fit and report from fixtures") {
    TempDir dir("cli-fit");
    const Outcome fit = cli("fit --from-fixtures");
    REQUIRE(fit.status == 0);
    const auto summary = quantiscene::Json::parse(fit.out.substr(fit.out.find('{')));
    CHECK(summary.at("partitioned").at("w").get<double>() > 1.14);
    const Outcome report = cli("report --from-fixtures --out " + q(dir / "r"));
    REQUIRE(report.status == 0);
    CHECK(std::filesystem::exists(dir / "r/curves.svg"));
    const Outcome refit = cli("fit --csv " + q(dir / "r/grid.csv"));
    CHECK(refit.status == 0);
  }
}
