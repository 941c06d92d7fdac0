#include <doctest.h>

#include <cstdlib>

#include "quantiscene/checksum.hpp"
#include "quantiscene/dataset.hpp"
#include "quantiscene/errors.hpp"
#include "test_util.hpp"

using namespace quantiscene;
using testutil::TempDir;

namespace {

GridConfig small_grid(int per_cell, std::uint64_t seed = 77) {
  GridConfig g = GridConfig::standard();
  g.instances_per_cell = per_cell;
  g.master_seed = seed;
  return g;
}

DatasetOptions eval_options(const GridConfig& grid, unsigned threads) {
  DatasetOptions o;
  o.split = "eval";
  o.master_seed = grid.master_seed;
  o.grid = to_json(grid);
  o.threads = threads;
  return o;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("grid presets") {
    const GridConfig standard = GridConfig::standard();
    CHECK(standard.cells.size() == 48);
    CHECK(standard.cells.size() * static_cast<std::size_t>(standard.instances_per_cell) == 49'152);
    int mixed = 0;
    for (const EvalConfig& c : standard.cells) {
      mixed += c.mixed();
      CHECK(c.object_budget == 15);
    }
    CHECK(mixed == 6);
    const GridConfig extended = GridConfig::extended();
    CHECK(extended.cells.size() == 60);
    for (const EvalConfig& c : extended.cells) {
      const Ratio r = c.ratios.front();
      const int expected = r.small == 8 ? 17 : r.small == 9 ? 19 : r.small == 10 ? 21 : 15;
      CHECK(c.object_budget == expected);
    }
    const GridConfig back = grid_from_json(Json::parse(to_json(standard).dump()));
    CHECK(to_json(back).dump() == to_json(standard).dump());
    CHECK(grid_from_json(Json::parse(R"({"preset":"extended"})")).cells.size() == 60);
  }

  TEST_CASE("evaluation records are consistent and thread-independent") {
    const GridConfig grid = small_grid(6);
    const auto one = generate_eval_records(grid, 1);
    const auto three = generate_eval_records(grid, 3);
    REQUIRE(one.size() == 48u * 6u);
    CHECK(one == three);
    CHECK(one.front().id == "eval-000000");
    CHECK(one.front().image_path == "eval/000000.png");
    for (const InstanceRecord& r : one) {
      REQUIRE_FALSE(consistency_violation(r).has_value());
      REQUIRE(r.cell.has_value());
      REQUIRE(r.counts.has_value());
      const EvalScene es = regenerate_eval_scene(grid, r);
      REQUIRE(es.scene == *r.scene);
    }
  }

  TEST_CASE("1000 training records round-trip field for field") {
    TrainGenConfig config;
    config.images = 200;
    config.master_seed = 5;
    const auto records = generate_train_records(config, 2);
    REQUIRE(records.size() == 1000);
    TempDir dir("roundtrip");
    DatasetOptions o;
    o.split = "train";
    o.master_seed = 5;
    o.captioner = "q_full";
    const DatasetManifest m = write_dataset(records, dir.path(), o);
    REQUIRE(m.splits.size() == 1);
    CHECK(m.splits[0].images == 200);
    CHECK(m.splits[0].records == 1000);
    CHECK(m.files.size() == 201);
    const Dataset d = read_dataset(dir.path());
    CHECK(d.records == records);
    CHECK(d.manifest.master_seed == 5);
    CHECK(d.manifest.captioner == "q_full");
    CHECK(verify_dataset(dir.path()).ok());
  }

  TEST_CASE("dataset bytes do not depend on the thread count") {
    const GridConfig grid = small_grid(3);
    const auto records = generate_eval_records(grid, 2);
    TempDir a("bytes-a"), b("bytes-b");
    write_dataset(records, a.path(), eval_options(grid, 1));
    write_dataset(generate_eval_records(grid, 4), b.path(), eval_options(grid, 4));
    for (const char* file : {"records.jsonl", "manifest.json", "eval/000000.png", "eval/000143.png"}) {
      INFO(file);
      CHECK(testutil::slurp(a / file) == testutil::slurp(b / file));
    }
    const VerifyReport report = verify_dataset(a.path(), 2);
    CHECK(report.ok());
    CHECK(report.records == records.size());
  }

  TEST_CASE("checksum mismatches and malformed files are reported") {
    const GridConfig grid = small_grid(1);
    const auto records = generate_eval_records(grid, 1);
    TempDir dir("tamper");
    write_dataset(records, dir.path(), eval_options(grid, 1));
    const auto png = dir / "eval/000005.png";
    std::string bytes = testutil::slurp(png);
    bytes[bytes.size() / 2] ^= 0x5a;
    testutil::spit(png, bytes);
    CHECK_THROWS_AS(read_dataset(dir.path()), DatasetError);
    CHECK_NOTHROW(read_dataset(dir.path(), false));
    CHECK_FALSE(verify_dataset(dir.path(), 1).ok());

    std::string lines = testutil::slurp(dir / "records.jsonl");
    lines.insert(lines.find('\n') + 1, "{not json\n");
    testutil::spit(dir / "records.jsonl", lines);
    try {
      read_dataset(dir.path(), false);
      FAIL("malformed record line was accepted");
    } catch (const DatasetError& e) {
      CHECK(std::string(e.what()).find("records.jsonl:2") != std::string::npos);
    }
    CHECK_THROWS_AS(read_dataset(dir / "missing"), DatasetError);
  }

  TEST_CASE("verify catches records inconsistent with their scenes") {
    const GridConfig grid = small_grid(1);
    auto records = generate_eval_records(grid, 1);
    TempDir dir("inconsistent");
    write_dataset(records, dir.path(), eval_options(grid, 1));
    std::string lines = testutil::slurp(dir / "records.jsonl");
    const auto pos = lines.find("\"agreement\":");
    REQUIRE(pos != std::string::npos);
    const bool was_true = lines.compare(pos + 12, 4, "true") == 0;
    lines.replace(pos + 12, was_true ? 4 : 5, was_true ? "false" : "true");
    testutil::spit(dir / "records.jsonl", lines);
    const VerifyReport report = verify_dataset(dir.path(), 1);
    CHECK_FALSE(report.ok());
    CHECK(report.problems.size() >= 2);
  }

  TEST_CASE("writing refuses inconsistent records") {
    const GridConfig grid = small_grid(1);
    auto records = generate_eval_records(grid, 1);
    records[3].agreement = !*records[3].agreement;
    TempDir dir("refuse");
    CHECK_THROWS_AS(write_dataset(records, dir.path(), eval_options(grid, 1)), DatasetError);
  }

  TEST_CASE("master seed environment override") {
    ::unsetenv("QUANTISCENE_SEED");
    CHECK(master_seed_from_env(9) == 9);
    ::setenv("QUANTISCENE_SEED", "1234", 1);
    CHECK(master_seed_from_env(9) == 1234);
    ::setenv("QUANTISCENE_SEED", "0x10", 1);
    CHECK(master_seed_from_env(9) == 16);
    ::setenv("QUANTISCENE_SEED", "12abc", 1);
    CHECK_THROWS_AS(master_seed_from_env(9), std::invalid_argument);
    ::unsetenv("QUANTISCENE_SEED");
  }

  TEST_CASE("SHA-256 known answers") {
    CHECK(sha256_hex(std::string_view("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string_view("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
