#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LSTMSVDD_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/lstmsvdd-cli-XXXXXX";
    REQUIRE(mkdtemp(tmpl) != nullptr);
    path = tmpl;
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return path + "/" + name;
  }
};

std::string kdd_line(const std::string& protocol, const std::string& service,
                     const std::string& flag, const std::string& label,
                     const std::string& duration = "0",
                     const std::string& src_bytes = "100") {
  std::vector<std::string> fields(41, "0");
  fields[0] = duration;
  fields[1] = protocol;
  fields[2] = service;
  fields[3] = flag;
  fields[4] = src_bytes;
  std::string line;
  for (const auto& f : fields) line += f + ",";
  return line + label;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string small_kdd_csv() {
  std::string text;
  for (int k = 0; k < 14; ++k)
    text += kdd_line("tcp", "http", "SF", "normal.", std::to_string(k % 3),
                     std::to_string(90 + 11 * k)) +
            "\n";
  for (int k = 0; k < 4; ++k)
    text += kdd_line("tcp", "private", "S0", "neptune.", "0", "0") + "\n";
  return text;
}

}  // namespace

TEST_CASE("cli: no subcommand or an unknown one is a usage error") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("transmogrify").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("train --no-such-flag").exit_code == 2);
}

TEST_CASE("cli: ingest summarizes, caches, and reports a hit on rerun") {
  TempDir tmp;
  write_file(tmp / "mini.csv", small_kdd_csv());

  const CliResult first = run_cli("ingest --input " + (tmp / "mini.csv") +
                                  " --cache " + (tmp / "cache") +
                                  " --lookback 5 --stride 1");
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("normal") != std::string::npos);
  CHECK(first.output.find("dos") != std::string::npos);
  CHECK(first.output.find("cache written") != std::string::npos);
  CHECK(std::filesystem::exists(tmp / "cache/encoder.json"));
  CHECK(std::filesystem::exists(tmp / "cache/windows-L5-S1-last.bin"));
  CHECK(std::filesystem::exists(tmp / "cache/summary.json"));
  CHECK(std::filesystem::exists(tmp / "cache/manifest-ingest.json"));

  const CliResult again = run_cli("ingest --input " + (tmp / "mini.csv") +
                                  " --cache " + (tmp / "cache") +
                                  " --lookback 5 --stride 1");
  CHECK(again.exit_code == 0);
  CHECK(again.output.find("cache hit") != std::string::npos);
}

TEST_CASE("cli: ingesting an empty file is a data error") {
  TempDir tmp;
  write_file(tmp / "empty.csv", "");
  const CliResult r = run_cli("ingest --input " + (tmp / "empty.csv") +
                              " --cache " + (tmp / "cache"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("no records") != std::string::npos);
}

TEST_CASE("cli: a cache directory refuses a second, different input") {
  TempDir tmp;
  write_file(tmp / "a.csv", small_kdd_csv());
  write_file(tmp / "b.csv", small_kdd_csv() +
                                kdd_line("udp", "domain_u", "SF", "normal.") +
                                "\n");
  CHECK(run_cli("ingest --input " + (tmp / "a.csv") + " --cache " +
                (tmp / "cache"))
            .exit_code == 0);
  const CliResult r = run_cli("ingest --input " + (tmp / "b.csv") +
                              " --cache " + (tmp / "cache"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("already caches") != std::string::npos);
}

TEST_CASE("cli: training twice with the same flags is byte-identical") {
  TempDir tmp;
  CHECK(run_cli("synth --normal 40 --anomalous 0 --seq-len 5 --seed 3 --out " +
                (tmp / "syn"))
            .exit_code == 0);
  const std::string flags = "train --cache " + (tmp / "syn") +
                            " --lookback 5 --model lstm --epochs 4 --seed 9";
  CHECK(run_cli(flags + " --out " + (tmp / "m1.json")).exit_code == 0);
  CHECK(run_cli(flags + " --out " + (tmp / "m2.json")).exit_code == 0);
  CHECK(read_file(tmp / "m1.json") == read_file(tmp / "m2.json"));
  CHECK(read_file(tmp / "m1.json.log.csv") ==
        read_file(tmp / "m2.json.log.csv"));
}

TEST_CASE("cli: single-record models reject sequence-only flags") {
  TempDir tmp;
  CHECK(run_cli("synth --normal 20 --seq-len 1 --out " + (tmp / "syn"))
            .exit_code == 0);
  const std::string base = "train --cache " + (tmp / "syn") + " --out " +
                           (tmp / "m.json") + " --model svdd";
  CHECK(run_cli(base + " --pooling max").exit_code == 2);
  CHECK(run_cli(base + " --lookback 5").exit_code == 2);
  CHECK(run_cli(base).exit_code == 0);
}

TEST_CASE("cli: train without an ingested cache explains what to run") {
  TempDir tmp;
  const CliResult r = run_cli("train --cache " + (tmp / "nowhere"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("ingest") != std::string::npos);
}

TEST_CASE("cli: config file fills defaults and flags override it") {
  TempDir tmp;
  CHECK(run_cli("synth --normal 30 --seq-len 1 --out " + (tmp / "syn"))
            .exit_code == 0);
  write_file(tmp / "train.cfg", "epochs=2\nnu=0.25\nmodel=svdd\n");

  CHECK(run_cli("train --cache " + (tmp / "syn") + " --config " +
                (tmp / "train.cfg") + " --out " + (tmp / "m1.json"))
            .exit_code == 0);
  const std::string m1 = read_file(tmp / "m1.json");
  CHECK(m1.find("\"nu\": 0.25") != std::string::npos);

  CHECK(run_cli("train --cache " + (tmp / "syn") + " --config " +
                (tmp / "train.cfg") + " --nu 0.5 --out " + (tmp / "m2.json"))
            .exit_code == 0);
  const std::string m2 = read_file(tmp / "m2.json");
  CHECK(m2.find("\"nu\": 0.5") != std::string::npos);

  write_file(tmp / "bad.cfg", "no_such_option=1\n");
  CHECK(run_cli("train --cache " + (tmp / "syn") + " --config " +
                (tmp / "bad.cfg"))
            .exit_code == 2);
}

TEST_CASE("cli: synth then train then eval round-trips with a report") {
  TempDir tmp;
  CHECK(run_cli("synth --normal 80 --anomalous 30 --seq-len 5 --seed 11 "
                "--out " +
                (tmp / "syn"))
            .exit_code == 0);
  CHECK(run_cli("train --cache " + (tmp / "syn") +
                " --lookback 5 --model lstm --epochs 6 --seed 1 --out " +
                (tmp / "m.json"))
            .exit_code == 0);

  const CliResult ev = run_cli("eval --model " + (tmp / "m.json") +
                               " --cache " + (tmp / "syn") + " --out " +
                               (tmp / "report.csv") + " --name run");
  CHECK(ev.exit_code == 0);
  CHECK(ev.output.find("w-sum weights") != std::string::npos);

  const std::string csv = read_file(tmp / "report.csv");
  CHECK(csv.rfind("name,normal,dos,probe,r2l,u2r,w_sum\nrun,", 0) == 0);
  CHECK(std::filesystem::exists(tmp / "report.csv.manifest.json"));
}

TEST_CASE("cli: eval rejects a cache encoded differently from the model") {
  TempDir tmp;
  write_file(tmp / "mini.csv", small_kdd_csv());
  CHECK(run_cli("ingest --input " + (tmp / "mini.csv") + " --cache " +
                (tmp / "kdd") + " --lookback 1")
            .exit_code == 0);
  CHECK(run_cli("train --cache " + (tmp / "kdd") +
                " --model svdd --epochs 2 --out " + (tmp / "m.json"))
            .exit_code == 0);

  CHECK(run_cli("synth --normal 20 --seq-len 1 --out " + (tmp / "syn"))
            .exit_code == 0);
  const CliResult r = run_cli("eval --model " + (tmp / "m.json") +
                              " --cache " + (tmp / "syn"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("encoder mismatch") != std::string::npos);
}

TEST_CASE("cli: explicit eval weights must name all five classes") {
  TempDir tmp;
  CHECK(run_cli("synth --normal 30 --anomalous 10 --seq-len 1 --out " +
                (tmp / "syn"))
            .exit_code == 0);
  CHECK(run_cli("train --cache " + (tmp / "syn") +
                " --model svdd --epochs 2 --out " + (tmp / "m.json"))
            .exit_code == 0);
  const std::string base =
      "eval --model " + (tmp / "m.json") + " --cache " + (tmp / "syn");
  CHECK(run_cli(base + " --weights normal=0.5,dos=0.5").exit_code == 2);
  CHECK(run_cli(base + " --weights normal=0.5,dos=0.5,probe=0,r2l=0,u2r=0")
            .exit_code == 0);
}

TEST_CASE("cli: gradcheck passes clean and fails its negative control") {
  const CliResult clean = run_cli("gradcheck --seed 4");
  CHECK(clean.exit_code == 0);
  CHECK(clean.output.find("all gradient checks passed") != std::string::npos);

  const CliResult corrupt = run_cli("gradcheck --seed 4 --corrupt");
  CHECK(corrupt.exit_code == 1);
  CHECK(corrupt.output.find("FAIL") != std::string::npos);
}

TEST_CASE("cli: manifests record the command and hashes") {
  TempDir tmp;
  write_file(tmp / "mini.csv", small_kdd_csv());
  CHECK(run_cli("ingest --input " + (tmp / "mini.csv") + " --cache " +
                (tmp / "cache") + " --lookback 5")
            .exit_code == 0);
  const std::string manifest = read_file(tmp / "cache/manifest-ingest.json");
  CHECK(manifest.find("\"command\": \"ingest\"") != std::string::npos);
  CHECK(manifest.find("\"input_fnv1a64\"") != std::string::npos);
  CHECK(manifest.find("\"started\"") != std::string::npos);
  CHECK(manifest.find("\"finished\"") != std::string::npos);
}
