// End-to-end tests of the fkp binary; FKP_CLI holds its path (set by ctest).
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "fkp/dataset.hpp"
#include "fkp/features.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const char* cli = std::getenv("FKP_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "FKP_CLI must point at the fkp binary");
  static int counter = 0;
  const fs::path out =
      fs::temp_directory_path() / ("fkp_cli_out_" + std::to_string(getpid()) + "_" +
                                   std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(cli) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = fkp_tests::read_file(out);
  fs::remove(out);
  return result;
}

}  // namespace

TEST_CASE("synth writes the dataset and is byte-deterministic") {
  fkp_tests::TempDir dir("cli_synth");
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  const std::string flags = " --subjects 2 --samples 4 --seed 9 ";

  const auto r1 = run_cli("synth --out " + a.string() + flags);
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("images 32") != std::string::npos);
  CHECK(r1.output.find("cfg dataset.seed=9") != std::string::npos);

  const auto r2 = run_cli("synth --out " + b.string() + flags);
  CHECK(r2.exit_code == 0);
  CHECK(fkp_tests::read_file(a / "manifest.csv") == fkp_tests::read_file(b / "manifest.csv"));
  const auto m = fkp::load_manifest(a);
  for (const auto& rec : m.records)
    CHECK(fkp_tests::read_file(a / rec.image_ref) == fkp_tests::read_file(b / rec.image_ref));
}

TEST_CASE("synth validates its flags with exit code 2") {
  fkp_tests::TempDir dir("cli_synth_bad");
  const auto r = run_cli("synth --out " + (dir.path() / "x").string() + " --subjects 0");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("num_subjects") != std::string::npos);
}

TEST_CASE("roi extracts every image of a healthy dataset") {
  fkp_tests::TempDir dir("cli_roi");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  REQUIRE(run_cli("synth --out " + data.string() + " --subjects 2 --samples 2 --seed 2").exit_code == 0);

  const auto r = run_cli("roi --in " + data.string() + " --out " + rois.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("roi images written: 16 of 16") != std::string::npos);

  const auto m = fkp::load_manifest(rois);
  CHECK(m.records.size() == 16);
  const auto img = fkp::read_png_gray(m.resolve(m.records.front()));
  CHECK(img.width == 220);
  CHECK(img.height == 110);
}

TEST_CASE("roi reports partial batch failure with exit code 3") {
  fkp_tests::TempDir dir("cli_roi_bad");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  REQUIRE(run_cli("synth --out " + data.string() + " --subjects 2 --samples 2 --seed 2").exit_code == 0);
  // corrupt one image
  const auto m = fkp::load_manifest(data);
  fkp_tests::write_file(m.resolve(m.records[3]), "not a png");

  const auto r = run_cli("roi --in " + data.string() + " --out " + rois.string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("roi images written: 15 of 16") != std::string::npos);
  CHECK(r.output.find("failed") != std::string::npos);
  CHECK(fkp::load_manifest(rois).records.size() == 15);
}

TEST_CASE("roi bypass accepts pre-cropped inputs unchanged in size") {
  fkp_tests::TempDir dir("cli_bypass");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  REQUIRE(run_cli("synth --out " + data.string() +
                  " --subjects 1 --samples 2 --seed 3 --width 220 --height 110")
              .exit_code == 0);
  const auto r = run_cli("roi --in " + data.string() + " --out " + rois.string() + " --bypass");
  CHECK(r.exit_code == 0);
  const auto m = fkp::load_manifest(rois);
  const auto img = fkp::read_png_gray(m.resolve(m.records.front()));
  CHECK(img.width == 220);
  CHECK(img.height == 110);
}

TEST_CASE("features writes a header that reflects the flags") {
  fkp_tests::TempDir dir("cli_feat");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  const auto feat = dir.path() / "features.fkpf";
  REQUIRE(run_cli("synth --out " + data.string() + " --subjects 2 --samples 2 --seed 2").exit_code == 0);
  REQUIRE(run_cli("roi --in " + data.string() + " --out " + rois.string()).exit_code == 0);

  const auto r = run_cli("features --in " + rois.string() + " --out " + feat.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("records=16, dim=6144") != std::string::npos);
  const auto store = fkp::load_features(feat);
  CHECK(store.header.dim == 6144);
  CHECK(store.header.orientations == 6);

  // D = 2 for a single orientation on a 1x1 grid
  const auto feat2 = dir.path() / "tiny.fkpf";
  const auto r2 = run_cli("features --in " + rois.string() + " --out " + feat2.string() +
                          " --orientations 1 --grid 1x1");
  CHECK(r2.exit_code == 0);
  CHECK(fkp::load_features(feat2).header.dim == 2);
}

TEST_CASE("features rejects filters beyond Nyquist with exit code 2") {
  fkp_tests::TempDir dir("cli_feat_nyq");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  REQUIRE(run_cli("synth --out " + data.string() + " --subjects 1 --samples 2 --seed 2").exit_code == 0);
  REQUIRE(run_cli("roi --in " + data.string() + " --out " + rois.string()).exit_code == 0);
  const auto r = run_cli("features --in " + rois.string() + " --out " +
                         (dir.path() / "x.fkpf").string() + " --f0 0.3 --scales 2");
  CHECK(r.exit_code == 2);
}

namespace {

// one shared pipeline run for the eval tests
struct EvalFixture {
  fkp_tests::TempDir dir{"cli_eval"};
  fs::path features = dir.path() / "features.fkpf";

  EvalFixture() {
    const auto data = dir.path() / "data";
    const auto rois = dir.path() / "rois";
    REQUIRE(run_cli("synth --out " + data.string() + " --subjects 3 --samples 4 --seed 5").exit_code == 0);
    REQUIRE(run_cli("roi --in " + data.string() + " --out " + rois.string()).exit_code == 0);
    REQUIRE(run_cli("features --in " + rois.string() + " --out " + features.string()).exit_code == 0);
  }

  CliResult eval(const std::string& extra) {
    return run_cli("eval --features " + features.string() + " --table " +
                   (dir.path() / "table.csv").string() + " --roc " +
                   (dir.path() / "roc.csv").string() + " " + extra);
  }
};

}  // namespace

TEST_CASE("eval emits tables, roc curves, and summaries") {
  EvalFixture fx;

  SUBCASE("single instance column") {
    const auto r = fx.eval("--instances RI --norm zscore");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("combination RI") != std::string::npos);
    CHECK(r.output.find("GAR@FAR=0.01%: ") != std::string::npos);
    CHECK(r.output.find("EER%: ") != std::string::npos);
    const auto table = fkp_tests::read_file(fx.dir.path() / "table.csv");
    CHECK(table.rfind("FAR%,RI\n", 0) == 0);
    const auto roc = fkp_tests::read_file(fx.dir.path() / "roc.csv");
    CHECK(roc.rfind("threshold,far,gar\n", 0) == 0);
  }

  SUBCASE("two-instance sweep in canonical column order") {
    const auto r = fx.eval("--instances RI,RM,LI,LM --pairs 2 --norm tanh");
    CHECK(r.exit_code == 0);
    const auto table = fkp_tests::read_file(fx.dir.path() / "table.csv");
    CHECK(table.rfind("FAR%,RI+RM,RI+LI,RI+LM,LI+LM,RM+LM,RM+LI\n", 0) == 0);
    CHECK(fs::exists(fx.dir.path() / "roc_RI+RM.csv"));
    CHECK(fs::exists(fx.dir.path() / "roc_RM+LI.csv"));
  }

  SUBCASE("bad scheme names list the valid ones with exit 2") {
    const auto r = fx.eval("--instances RI --norm bogus");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("minmax") != std::string::npos);
    CHECK(r.output.find("zscore") != std::string::npos);
    CHECK(r.output.find("mad") != std::string::npos);
    CHECK(r.output.find("tanh") != std::string::npos);
  }

  SUBCASE("bad instance codes exit 2") {
    const auto r = fx.eval("--instances RI,XX --norm zscore");
    CHECK(r.exit_code == 2);
  }

  SUBCASE("identical configs produce byte-identical artifacts") {
    const auto r1 = fx.eval("--instances RI,RM --norm zscore --meta " +
                            (fx.dir.path() / "m1.txt").string());
    REQUIRE(r1.exit_code == 0);
    const auto table1 = fkp_tests::read_file(fx.dir.path() / "table.csv");
    const auto roc1 = fkp_tests::read_file(fx.dir.path() / "roc.csv");
    const auto r2 = fx.eval("--instances RI,RM --norm zscore --meta " +
                            (fx.dir.path() / "m2.txt").string());
    REQUIRE(r2.exit_code == 0);
    CHECK(fkp_tests::read_file(fx.dir.path() / "table.csv") == table1);
    CHECK(fkp_tests::read_file(fx.dir.path() / "roc.csv") == roc1);
    CHECK(fkp_tests::read_file(fx.dir.path() / "m1.txt") ==
          fkp_tests::read_file(fx.dir.path() / "m2.txt"));
  }

  SUBCASE("custom FAR operating points are echoed verbatim") {
    const auto r = fx.eval("--instances RI --norm zscore --far-points 0.5,2.5,10");
    CHECK(r.exit_code == 0);
    const auto table = fkp_tests::read_file(fx.dir.path() / "table.csv");
    CHECK(table.find("\n0.5,") != std::string::npos);
    CHECK(table.find("\n2.5,") != std::string::npos);
    CHECK(table.find("\n10,") != std::string::npos);
    CHECK(r.output.find("GAR@FAR=2.5%: ") != std::string::npos);
  }

  SUBCASE("per-instance stats sidecars are written on request") {
    const auto stats_dir = fx.dir.path() / "stats";
    const auto r = fx.eval("--instances RI,RM --norm minmax --stats-out " + stats_dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(stats_dir / "stats_RI.fkn"));
    CHECK(fs::exists(stats_dir / "stats_RM.fkn"));
  }
}

TEST_CASE("eval reports protocol infeasibility with exit 4") {
  fkp_tests::TempDir dir("cli_eval_single");
  const auto data = dir.path() / "data";
  const auto rois = dir.path() / "rois";
  const auto feat = dir.path() / "f.fkpf";
  REQUIRE(run_cli("synth --out " + data.string() + " --subjects 1 --samples 4 --seed 5").exit_code == 0);
  REQUIRE(run_cli("roi --in " + data.string() + " --out " + rois.string()).exit_code == 0);
  REQUIRE(run_cli("features --in " + rois.string() + " --out " + feat.string()).exit_code == 0);

  const auto r = run_cli("eval --features " + feat.string() + " --instances RI --norm zscore" +
                         " --table " + (dir.path() / "t.csv").string() + " --roc " +
                         (dir.path() / "r.csv").string());
  CHECK(r.exit_code == 4);
}

TEST_CASE("config files steer the pipeline and flags override them") {
  fkp_tests::TempDir dir("cli_cfg");
  fkp_tests::write_file(dir.path() / "run.cfg",
                        "dataset.subjects=2\ndataset.samples=2\ndataset.seed=8\n");
  const auto data = dir.path() / "data";
  const auto r = run_cli("--config " + (dir.path() / "run.cfg").string() + " synth --out " +
                         data.string() + " --seed 9");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("cfg dataset.subjects=2") != std::string::npos);
  CHECK(r.output.find("cfg dataset.seed=9") != std::string::npos);  // flag wins
  CHECK(fkp::load_manifest(data).records.size() == 16);

  fkp_tests::write_file(dir.path() / "bad.cfg", "dataset.unknown=1\n");
  const auto rb = run_cli("--config " + (dir.path() / "bad.cfg").string() + " synth --out " +
                          (dir.path() / "x").string());
  CHECK(rb.exit_code == 2);
  CHECK(rb.output.find("unknown") != std::string::npos);
}

TEST_CASE("unreadable manifests exit with code 1") {
  fkp_tests::TempDir dir("cli_io");
  const auto r = run_cli("roi --in " + (dir.path() / "nope").string() + " --out " +
                         (dir.path() / "out").string());
  CHECK(r.exit_code == 1);
}
