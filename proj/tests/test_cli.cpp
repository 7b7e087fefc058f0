#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "xmb/store.hpp"

using namespace xmb;
namespace fs = std::filesystem;

namespace {

const fs::path kTool = XMBSA_PATH;

// Runs the tool from `cwd` with output captured to <cwd>/last.log.
int run(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + kTool.string() + "' " + args + " > last.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string log(const fs::path& cwd) { return fixture::read_file(cwd / "last.log"); }

struct Workspace {
  fs::path dir = fixture::temp_dir("cli");
  Workspace() {
    const auto a = fixture::blobs(60, 4, 6.0, 41);
    const auto b = fixture::blobs(60, 2, 6.0, 42);
    const auto corpus = fixture::placeholder_corpus(a.y);
    save_corpus(corpus, dir / "corpus.csv");
    write_store(fixture::make_store("alpha", a.x, corpus.digest()), dir / "alpha");
    write_store(fixture::make_store("beta", b.x, corpus.digest()), dir / "beta");
    write_store(fixture::make_store("flat", Matrix::Constant(60, 3, 1.0), corpus.digest()), dir / "flat");
    fixture::write_file(dir / "good.cfg",
                        "corpus.path = corpus.csv\n"
                        "stores.alpha = alpha\n"
                        "grid.dr = none, pca\n"
                        "grid.classifiers = LR, KNN\n"
                        "pca.dims = 2\n"
                        "output.dir = run\n");
    fixture::write_file(dir / "failing.cfg",
                        "corpus.path = corpus.csv\n"
                        "stores.flat = flat\n"
                        "grid.dr = pca\n"
                        "grid.classifiers = LR\n"
                        "output.dir = failing\n");
  }
  ~Workspace() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("exit codes") {
  Workspace w;
  CHECK(run(w.dir, "--help") == 0);
  CHECK(run(w.dir, "grid --bogus") == 2);
  CHECK(run(w.dir, "grid") == 2);
  CHECK(log(w.dir).find("--config is required") != std::string::npos);
  fixture::write_file(w.dir / "typo.cfg", "corpus.path = corpus.csv\npca.target = 0.9\npca.dims = 2\n");
  CHECK(run(w.dir, "--config typo.cfg grid") == 2);
  fixture::write_file(w.dir / "missing.cfg", "corpus.path = nowhere.csv\nstores.alpha = alpha\ngrid.classifiers = LR\n");
  CHECK(run(w.dir, "--config missing.cfg grid") == 3);
  CHECK(run(w.dir, "--config failing.cfg grid") == 4);
  CHECK(fs::exists(w.dir / "failing" / "results.csv"));
  CHECK(fixture::read_file(w.dir / "failing" / "results.csv").find("failed") != std::string::npos);
}

TEST_CASE("grid, report and plot") {
  Workspace w;
  REQUIRE(run(w.dir, "--config good.cfg --seed 3 grid") == 0);
  const auto csv = fixture::read_file(w.dir / "run" / "results.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const auto manifest = nlohmann::json::parse(fixture::read_file(w.dir / "run" / "run_manifest.json"));
  CHECK(manifest["split"]["seed"] == 3);

  // --out overrides output.dir and the rerun is identical
  REQUIRE(run(w.dir, "--config good.cfg --seed 3 --out again grid") == 0);
  CHECK(fixture::read_file(w.dir / "again" / "results.csv") == csv);

  REQUIRE(run(w.dir, "--out run report") == 0);
  CHECK(fs::exists(w.dir / "run" / "table2.csv"));
  REQUIRE(run(w.dir, "--out run plot") == 0);
  CHECK(fs::exists(w.dir / "run" / "plots" / "alpha__pca__KNN.roc.svg"));
  CHECK(fs::exists(w.dir / "run" / "plots" / "class_distribution.svg"));
}

TEST_CASE("fuse, reduce, train and evaluate") {
  Workspace w;
  REQUIRE(run(w.dir, "--out fused fuse --inputs alpha,beta --store-dir .") == 0);
  const auto fused = read_store(w.dir / "fused");
  CHECK(fused.dim() == 6);
  CHECK(fused.manifest().model_id == "fused");
  CHECK(run(w.dir, "--out bad fuse --inputs alpha,nothing") == 3);

  REQUIRE(run(w.dir, "--out small reduce --store alpha --corpus corpus.csv --pca-dims 2 --tsne tsne.csv --perplexity 5 "
                     "--iterations 300") == 0);
  CHECK(read_store(w.dir / "small").dim() == 2);
  CHECK(fixture::read_file(w.dir / "tsne.csv").rfind("x,y,label\n", 0) == 0);
  CHECK(run(w.dir, "--out small reduce --store alpha --pca-dims 2 --pca-target 0.5") == 2);

  REQUIRE(run(w.dir, "--config good.cfg --out model train --fe alpha --dr pca --classifier LR") == 0);
  CHECK(fs::exists(w.dir / "model.model.json"));
  CHECK(fs::exists(w.dir / "model.run.json"));
  REQUIRE(run(w.dir, "--config good.cfg --out eval evaluate --model model") == 0);
  CHECK(log(w.dir).find("accuracy") != std::string::npos);
  CHECK(fs::exists(w.dir / "eval" / "confusion.csv"));
  CHECK(run(w.dir, "--config good.cfg --out eval evaluate --model nothing") == 3);
}

TEST_CASE("preprocess") {
  Workspace w;
  fixture::write_file(w.dir / "raw.csv",
                      "id,text,label\n"
                      "0,\"ভালো লাগলো, অসাধারণ!\",positive\n"
                      "1,!!!,neutral\n"
                      "2,খুব খারাপ,negative\n");
  REQUIRE(run(w.dir, "--out cleaned.csv preprocess --in raw.csv") == 0);
  const auto text = fixture::read_file(w.dir / "cleaned.csv");
  CHECK(text.find("empty_after_cleaning") != std::string::npos);
  CHECK(text.find("1,,neutral,1") != std::string::npos);
  CHECK(log(w.dir).find("1 emptied") != std::string::npos);
  CHECK(run(w.dir, "preprocess --in raw.csv") == 2);
}
