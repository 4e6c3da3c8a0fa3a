#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sparsetw/cli.hpp"
#include "sparsetw/edge_stats.hpp"
#include "sparsetw/io.hpp"

using namespace sparsetw;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("density writes a symmetric grid") {
  const auto dir = scratch("density");
  const auto r = run({"density", "--s4", "1", "--q", "30", "--grid", "2001", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(read_file(dir / "density.csv"));
  REQUIRE(rows.size() == 2002);
  CHECK(rows[0] == "E,density");
  std::vector<double> e, rho;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto comma = rows[i].find(',');
    e.push_back(std::stod(rows[i].substr(0, comma)));
    rho.push_back(std::stod(rows[i].substr(comma + 1)));
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    REQUIRE(e[i] == -e[e.size() - 1 - i]);
    REQUIRE(std::abs(rho[i] - rho[rho.size() - 1 - i]) <= 1e-12);
  }
  const auto meta = nlohmann::json::parse(read_file(dir / "meta.json"));
  CHECK(meta["command"] == "density");
  CHECK(meta["params"]["q"] == 30);
  CHECK(meta["params"]["grid"] == 2001);
  CHECK(meta["version"] == std::string(kVersion));
  CHECK(meta.contains("timestamp"));
  CHECK(meta.contains("elapsed_s"));
}

TEST_CASE("edge prints L and tau") {
  const auto r = run({"edge", "--s4", "1", "--q", "30"});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("L = ");
  REQUIRE(pos != std::string::npos);
  const double l = std::stod(r.out.substr(pos + 4));
  CHECK(l > 2.0);
  CHECK(l < 2.0012);
  CHECK(r.out.find("tau = ") != std::string::npos);
}

TEST_CASE("selftest passes") {
  const auto r = run({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("validation errors exit with 1 and write nothing") {
  const auto dir = scratch("invalid");
  CHECK(run({"density", "--s4", "1", "--q", "30", "--bogus", "--out", dir.string()}).code == 1);
  CHECK(run({"tw", "--n", "100", "--p", "0.1", "--q", "5", "--seed", "1", "--out", dir.string()}).code == 1);
  CHECK(run({"tw", "--n", "100", "--p", "0.1", "--out", dir.string()}).code == 1);  // no seed
  CHECK(run({"density", "--s4", "-1", "--q", "30", "--out", dir.string()}).code == 1);
  CHECK(run({"density", "--s4", "1", "--q", "30", "--mode", "loose", "--out", dir.string()}).code == 1);
  CHECK(run({"tw", "--n", "100", "--p", "0.1", "--seed", "1", "--center", "middle", "--out", dir.string()}).code == 1);
  CHECK(run({}).code == 1);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("runtime errors exit with 2") {
  const auto dir = scratch("runtime");
  CHECK(run({"community", "--graph", (dir / "missing.txt").string(), "--reference", "nope.csv"}).code == 2);
  CHECK(run({"density", "--s4", "1", "--q", "10", "--out", dir.string()}).code == 1);  // strict limit
}

TEST_CASE("tw is reproducible and creates nested directories") {
  const auto base = scratch("tw");
  const auto a = base / "nested" / "missing" / "a";
  const auto b = base / "b";
  const std::vector<std::string> args{"tw", "--n", "60", "--p", "0.2", "--samples", "8", "--seed", "99"};
  auto args_a = args, args_b = args;
  args_a.insert(args_a.end(), {"--out", a.string(), "--workers", "2"});
  args_b.insert(args_b.end(), {"--out", b.string(), "--workers", "1"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(read_file(a / "edge_samples.csv") == read_file(b / "edge_samples.csv"));
  CHECK(read_file(a / "ks.json") == read_file(b / "ks.json"));
  const auto meta = nlohmann::json::parse(read_file(a / "meta.json"));
  CHECK(meta["master_seed"] == 99);
  CHECK(lines(read_file(a / "edge_samples.csv")).size() == 9);
}

TEST_CASE("local-law, flow and community commands") {
  const auto dir = scratch("misc");
  REQUIRE(run({"local-law", "--ensemble", "sparse-generic", "--n", "700", "--q", "25", "--seed", "3", "--out",
               (dir / "ll").string()})
              .code == 0);
  CHECK(lines(read_file(dir / "ll" / "local_law.csv")).size() == 1001);
  REQUIRE(run({"flow", "--s4", "1", "--q", "30", "--n", "1000", "--out", (dir / "flow").string()}).code == 0);
  CHECK(lines(read_file(dir / "flow" / "flow_trajectory.csv")).size() == 27);

  const auto raw = sample_er_graph(200, 0.1, RngStream{5, 0});
  write_file_atomic(dir / "graph.txt", edge_list_text(raw));
  ReferenceCdf({-2.0, -1.0, 0.0, 1.0}, 1000, 0).save(dir / "ref.csv");
  const auto r = run({"community", "--graph", (dir / "graph.txt").string(), "--reference",
                      (dir / "ref.csv").string(), "--out", (dir / "c").string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(read_file(dir / "c" / "community.json"));
  CHECK(summary["n"] == 200);
  CHECK(summary["p_value"].get<double>() >= 0.0);
}

TEST_CASE("installed binary honours the exit-code contract") {
  const std::string bin = SPARSETW_CLI_PATH;
  CHECK(WEXITSTATUS(std::system((bin + " edge --s4 1 --q 30 > /dev/null").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((bin + " edge --s4 1 > /dev/null 2>&1").c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((bin + " --version > /dev/null").c_str())) == 0);
}
