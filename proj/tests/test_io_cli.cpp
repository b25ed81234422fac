#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpres/cli.hpp"
#include "gpres/io.hpp"
#include "support/generators.hpp"

using namespace gpres;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

const std::filesystem::path kTmp = std::filesystem::temp_directory_path() / "gpres_io_cli_tmp";

std::string write_file(const std::string& name, const std::string& content) {
  std::filesystem::create_directories(kTmp);
  const std::string path = (kTmp / name).string();
  std::ofstream f(path);
  f << content;
  return path;
}

std::string fig_file(const std::string& name, std::vector<double> probs) {
  json levels = json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    json lv = {{"E", double(i)}, {"n", 0.0}};
    if (!probs.empty()) lv["p"] = probs[i];
    levels.push_back(lv);
  }
  return write_file(name, json{{"beta", std::log(2.0)}, {"mu", 0.0}, {"levels", levels}}.dump());
}

QCState fig_state(std::vector<double> probs) {
  Spectrum sp{{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}};
  return make_state(sp, {std::log(2.0), 0.0}, std::move(probs));
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json run_json(const std::vector<std::string>& args) {
  const CliRun r = run_cli(args);
  INFO(r.err);
  REQUIRE(r.code == 0);
  return json::parse(r.out);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("state files parse with and without probabilities") {
  const std::string with_p =
      R"({"beta": 2.0, "mu": -0.5, "levels": [{"E": 0.0, "n": 0, "p": 0.7},
                                              {"E": 1.5, "n": 1, "p": 0.3}]})";
  const StateFileResult a = parse_state_json(with_p);
  REQUIRE_FALSE(a.gibbs_requested);
  REQUIRE(a.state.dim() == 2);
  REQUIRE(a.state.probs[0] == 0.7);
  REQUIRE(a.state.theory.beta == 2.0);

  const std::string bare =
      R"({"beta": 2.0, "mu": -0.5, "levels": [{"E": 0.0, "n": 0}, {"E": 1.5, "n": 1}]})";
  const StateFileResult b = parse_state_json(bare);
  REQUIRE(b.gibbs_requested);
  for (std::size_t i = 0; i < 2; ++i) REQUIRE(b.state.probs[i] == b.state.gibbs[i]);
}

TEST_CASE("parse errors carry field paths") {
  const auto expect_error = [](const std::string& text, const std::string& fragment) {
    REQUIRE_THROWS_WITH(parse_state_json(text), ContainsSubstring(fragment));
  };
  expect_error(R"({"mu": 0, "levels": [{"E": 0, "n": 0}]})", "missing required key \"beta\"");
  expect_error(R"({"beta": 1, "mu": 0, "levels": []})", "non-empty array");
  expect_error(R"({"beta": 1, "mu": 0, "levels": [{"E": 0, "n": 0, "p": 0.4},
                                                  {"E": 1, "n": 0, "p": "x"}]})",
               "levels[1].p");
  expect_error(R"({"beta": 1, "mu": 0, "levels": [{"n": 0, "p": 1.0}]})", "levels[0]");
  expect_error(R"({"beta": 1, "mu": 0, "levels": [{"E": 0, "n": 0, "p": 0.4},
                                                  {"E": 1, "n": 0}]})",
               "either every level carries \"p\" or none does");
  expect_error(R"({"beta": 1, "mu": 0, "levels": [{"E": 0, "n": 0, "p": 0.5},
                                                  {"E": 1, "n": 0, "p": 0.2}]})",
               "away from one");
  expect_error(R"({"beta": -1, "mu": 0, "levels": [{"E": 0, "n": 0}]})", "beta");
  expect_error("{not json", "state file");
  REQUIRE_THROWS_AS(load_state_file("does_not_exist.json"), ParseError);
  REQUIRE_THROWS_WITH(load_state_file("does_not_exist.json"), ContainsSubstring("cannot open"));
}

TEST_CASE("serialization round trips bit for bit") {
  Spectrum sp{{{1.0 / 3.0, 0.0}, {0.1 + 0.2, 1.0}, {-2.7182818284590452, 2.0}}};
  const TheoryParams th{0.30000000000000004, -0.1};
  std::vector<double> p = {0.12345678901234567, 0.5, 1.0 - 0.12345678901234567 - 0.5};
  const QCState original = make_state(sp, th, p);
  const StateFileResult back = parse_state_json(serialize_state(original));
  REQUIRE(same_bits(back.state.theory.beta, original.theory.beta));
  REQUIRE(same_bits(back.state.theory.mu, original.theory.mu));
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(same_bits(back.state.spectrum.levels[i].energy, original.spectrum.levels[i].energy));
    REQUIRE(same_bits(back.state.spectrum.levels[i].particles,
                      original.spectrum.levels[i].particles));
    REQUIRE(same_bits(back.state.probs[i], original.probs[i]));
  }
}

TEST_CASE("extended reals cross into JSON safely") {
  REQUIRE(ext_real_to_json(ExtReal::finite(1.5)) == json(1.5));
  REQUIRE(ext_real_to_json(ExtReal::inf()) == json("inf"));
}

TEST_CASE("lorenz CSV holds every breakpoint exactly") {
  const QCState r = fig_state({0.8, 0.1, 0.1});
  const LorenzCurve c = build_lorenz(r);
  std::ostringstream ss;
  write_lorenz_csv(ss, c);
  std::istringstream in(ss.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "t,L");
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    REQUIRE(std::getline(in, line));
    const auto comma = line.find(',');
    REQUIRE(same_bits(std::stod(line.substr(0, comma)), c.t[i]));
    REQUIRE(same_bits(std::stod(line.substr(comma + 1)), c.L[i]));
  }
  REQUIRE_FALSE(std::getline(in, line));
}

TEST_CASE("sweep CSV leaves overflowed cells empty") {
  SecondOrderExpansion full;
  full.n = 2;
  full.leading = 0.5;
  full.correction = -0.25;
  full.exact = 0.3;
  full.residual = 0.05;
  SecondOrderExpansion capped;
  capped.n = 3;
  capped.leading = 0.75;
  capped.correction = -0.31;
  std::ostringstream ss;
  write_sweep_csv(ss, {full, capped});
  std::istringstream in(ss.str());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "n,exact,leading,correction,residual");
  const auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(s);
    while (std::getline(fs, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.push_back("");
    return fields;
  };
  std::getline(in, line);
  const auto row_full = split(line);
  REQUIRE(row_full.size() == 5);
  REQUIRE(row_full[0] == "2");
  REQUIRE(std::stod(row_full[1]) == 0.3);
  REQUIRE(std::stod(row_full[2]) == 0.5);
  REQUIRE(std::stod(row_full[3]) == -0.25);
  REQUIRE(std::stod(row_full[4]) == 0.05);
  std::getline(in, line);
  const auto fields = split(line);
  REQUIRE(fields.size() == 5);
  REQUIRE(fields[0] == "3");
  REQUIRE(fields[1].empty());
  REQUIRE(std::stod(fields[2]) == 0.75);
  REQUIRE(fields[4].empty());
}

TEST_CASE("cli computes the same numbers as the library") {
  const std::string r1 = fig_file("r1.json", {0.8, 0.1, 0.1});
  const std::string r2 = fig_file("r2.json", {0.5, 0.45, 0.05});
  const std::string r3 = fig_file("r3.json", {0.6, 0.28, 0.12});
  const QCState s1 = fig_state({0.8, 0.1, 0.1});
  const QCState s3 = fig_state({0.6, 0.28, 0.12});

  SECTION("gibbs") {
    const json j = run_json({"gibbs", r1});
    const QCState g = gibbs_state(s1.spectrum, s1.theory);
    REQUIRE(j.at("log_z").get<double>() == g.log_z);
    for (std::size_t i = 0; i < 3; ++i)
      REQUIRE(j.at("levels")[i].at("p").get<double>() == g.probs[i]);
  }

  SECTION("lorenz with csv") {
    const std::string csv = (kTmp / "r1_lorenz.csv").string();
    const json j = run_json({"lorenz", r1, "--csv", csv});
    const LorenzCurve c = build_lorenz(s1);
    REQUIRE(j.at("t").get<std::vector<double>>() == c.t);
    REQUIRE(j.at("L").get<std::vector<double>>() == c.L);
    std::ifstream in(csv);
    std::string header;
    REQUIRE(std::getline(in, header));
    REQUIRE(header == "t,L");
  }

  SECTION("compare") {
    const json ordered = run_json({"compare", r1, r3});
    REQUIRE(ordered.at("a_to_b") == true);
    REQUIRE(ordered.at("b_to_a") == false);
    const json incomparable = run_json({"compare", r1, r2});
    REQUIRE(incomparable.at("a_to_b") == false);
    REQUIRE(incomparable.at("b_to_a") == false);
  }

  SECTION("witness") {
    const json found = run_json({"witness", r1, r3});
    REQUIRE(found.at("exists") == true);
    REQUIRE(found.at("rows") == 3);
    REQUIRE(found.at("cols") == 3);
    const auto data = found.at("data").get<std::vector<double>>();
    StochasticWitness w;
    w.rows = 3;
    w.cols = 3;
    w.m = data;
    REQUIRE(verify_witness(w, s1, s3));
    const json missing = run_json({"witness", r1, r2});
    REQUIRE(missing.at("exists") == false);
  }

  SECTION("b-eps and dh") {
    const json b = run_json({"b-eps", r1, "--eps", "0.1"});
    REQUIRE(b.at("b_eps").get<double>() == type2_error(s1, 0.1));
    const json d = run_json({"dh", r1, "--eps", "0.25"});
    REQUIRE(d.at("dh").get<double>() == dh_entropy(s1, 0.25).value);
  }

  SECTION("work quantities") {
    const json g = run_json({"work-gain", r1, "--eps", "0.2"});
    REQUIRE(g.at("w_gain").get<double>() == work_gain(s1, 0.2).value);
    REQUIRE_THAT(g.at("units").get<std::string>(), ContainsSubstring("beta"));
    const json c = run_json({"work-cost", r1, "--eps", "0.2"});
    const WorkReport rep = work_report(s1, 0.2);
    REQUIRE(c.at("w_cost_lower").get<double>() == rep.w_cost_lower);
    REQUIRE(c.at("w_cost_upper").get<double>() == rep.w_cost_upper);
    REQUIRE(c.at("asymptotic_rate").get<double>() == rep.asymptotic_rate);
  }

  SECTION("channel with synthetic battery") {
    const json j = run_json({"channel", r1, "--eps", "0.1"});
    REQUIRE(j.at("synthetic_battery") == true);
    REQUIRE(j.at("rows") == 2);
    REQUIRE(j.at("cols") == 6);
    REQUIRE(j.at("work").get<double>() == work_gain(s1, 0.1).value);
    const auto data = j.at("data").get<std::vector<double>>();
    for (std::size_t col = 0; col < 6; ++col) {
      double sum = 0.0;
      for (std::size_t row = 0; row < 2; ++row) sum += data[row * 6 + col];
      REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
    }
  }

  SECTION("channel with explicit battery file") {
    const double w = work_gain(s1, 0.1).value;
    const json battery = {{"beta", std::log(2.0)},
                          {"mu", 0.0},
                          {"levels", {{{"E", 0.0}, {"n", 0.0}}, {{"E", w}, {"n", 0.0}}}}};
    const std::string path = write_file("battery.json", battery.dump());
    const json j = run_json({"channel", r1, "--eps", "0.1", "--battery", path});
    REQUIRE(j.at("synthetic_battery") == false);
    REQUIRE(j.at("level_in") == 0);
    REQUIRE(j.at("level_out") == 1);
  }

  SECTION("rate") {
    const json j = run_json({"rate", r1, r3});
    REQUIRE(j.at("rate").get<double>() == conversion_rate(s1, s3));
  }

  SECTION("fit and free diagnostics") {
    const std::string gfile = fig_file("g.json", {});
    const json fit = run_json({"fit-gibbs", gfile});
    REQUIRE(fit.at("status") == "fitted");
    REQUIRE_THAT(fit.at("beta").get<double>(), WithinAbs(std::log(2.0), 1e-9));
    REQUIRE_THAT(fit.at("mu").get<double>(), WithinAbs(0.0, 1e-9));
    const json free = run_json({"check-free", gfile});
    REQUIRE(free.at("uniform_eigensubspaces") == true);
    REQUIRE(free.at("matches_declared_theory") == true);
    const json not_free = run_json({"check-free", r1});
    REQUIRE(not_free.at("matches_declared_theory") == false);
  }

  SECTION("gibbs output is itself a loadable state file") {
    const CliRun r = run_cli({"gibbs", r1});
    REQUIRE(r.code == 0);
    const std::string path = write_file("g_roundtrip.json", r.out);
    const StateFileResult loaded = load_state_file(path);
    const QCState g = gibbs_state(s1.spectrum, s1.theory);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(loaded.state.probs[i] == g.probs[i]);
  }
}

TEST_CASE("cli asymptotics sweep") {
  const json doc = {{"beta", 1.0},
                    {"mu", 0.0},
                    {"levels",
                     {{{"E", 0.0}, {"n", 0.0}, {"p", 0.9}}, {{"E", 0.0}, {"n", 0.0}, {"p", 0.1}}}}};
  const std::string path = write_file("coin.json", doc.dump());
  const std::string csv = (kTmp / "sweep.csv").string();
  const json j = run_json({"asymptotics", path, "--eps", "0.1", "--n", "5", "--csv", csv});
  const QCState coin = parse_state_json(doc.dump()).state;
  REQUIRE(j.at("limit_rate").get<double>() == relative_entropy(coin));
  REQUIRE(j.at("points").size() == 5);
  for (const json& p : j.at("points")) {
    REQUIRE_FALSE(p.at("exact").is_null());
    REQUIRE_FALSE(p.at("residual").is_null());
  }
  std::ifstream in(csv);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  REQUIRE(lines == 6);
}

TEST_CASE("cli exit codes distinguish failure modes") {
  REQUIRE(run_cli({"no-such-command"}).code == 2);
  REQUIRE(run_cli({}).code == 2);
  REQUIRE(run_cli({"dh", "missing_file.json"}).code == 2);
  const std::string r1 = fig_file("r1_codes.json", {0.8, 0.1, 0.1});
  REQUIRE(run_cli({"dh", r1, "--eps", "1.0"}).code == 1);
  const CliRun help = run_cli({"--help"});
  REQUIRE(help.code == 0);
  REQUIRE_THAT(help.out, ContainsSubstring("lorenz"));
  const CliRun bad = run_cli({"dh"});
  REQUIRE(bad.code == 2);
  REQUIRE_THAT(bad.err, ContainsSubstring("file"));
}
