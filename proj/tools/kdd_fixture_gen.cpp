// Generates the shipped desk-scale connection-record fixture: a deterministic
// stream of normal traffic sessions interleaved with multi-phase attack
// episodes, written as 42-field CSV plus a manifest of exact label counts.
//
// The traffic is shaped so that the interesting orderings are non-trivial:
//  - a slice of "weird" normals (large transfers) widens a record-level
//    sphere, so sustained-but-moderate floods hide inside it;
//  - flood records individually overlap normal ranges but dominate whole
//    windows, so sequence models that pool a window can separate them;
//  - scans and password guessing sit far out on their own columns.

#include "CLI11.hpp"

#include "lstmsvdd/cache.hpp"
#include "lstmsvdd/linalg.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

using lstmsvdd::Rng;

namespace {

// 41 features; [1],[2],[3] symbolic; the label is appended at write time.
struct Record {
  std::array<std::string, 41> f;
  std::string label;
};

enum Field : std::size_t {
  kDuration = 0, kProtocol = 1, kService = 2, kFlag = 3, kSrcBytes = 4,
  kDstBytes = 5, kHot = 9, kFailedLogins = 10, kLoggedIn = 11,
  kCompromised = 12, kRootShell = 13, kNumRoot = 15, kFileCreations = 16,
  kNumShells = 17, kAccessFiles = 18, kGuestLogin = 21, kCount = 22,
  kSrvCount = 23, kSerror = 24, kSrvSerror = 25, kRerror = 26,
  kSrvRerror = 27, kSameSrv = 28, kDiffSrv = 29, kDstHostCount = 31,
  kDstHostSrvCount = 32, kDstHostSameSrv = 33, kDstHostDiffSrv = 34,
  kDstHostSerror = 37, kDstHostSrvSerror = 38, kDstHostRerror = 39,
  kDstHostSrvRerror = 40,
};

struct Emitter {
  Rng rng;
  std::vector<Record> out;
  std::map<std::string, std::size_t> name_counts;

  explicit Emitter(std::uint64_t seed) : rng(seed) {}

  std::size_t ui(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  }
  double ud(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
  bool chance(double p) { return rng.uniform() < p; }

  static std::string num(std::size_t v) { return std::to_string(v); }
  static std::string rate(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v < 0 ? 0.0 : (v > 1 ? 1.0 : v));
    return buf;
  }

  Record base(const char* protocol, const char* service, const char* flag) {
    Record r;
    r.f.fill("0");
    r.f[kProtocol] = protocol;
    r.f[kService] = service;
    r.f[kFlag] = flag;
    r.f[kSameSrv] = rate(ud(0.85, 1.0));
    r.f[kDiffSrv] = rate(ud(0.0, 0.12));
    r.f[kSerror] = rate(ud(0.0, 0.06));
    r.f[kSrvSerror] = rate(ud(0.0, 0.06));
    r.f[kRerror] = rate(ud(0.0, 0.08));
    r.f[kSrvRerror] = rate(ud(0.0, 0.08));
    r.f[kDstHostCount] = num(ui(1, 255));
    r.f[kDstHostSrvCount] = num(ui(1, 255));
    r.f[kDstHostSameSrv] = rate(ud(0.5, 1.0));
    r.f[kDstHostDiffSrv] = rate(ud(0.0, 0.1));
    r.f[kDstHostSerror] = rate(ud(0.0, 0.05));
    r.f[kDstHostSrvSerror] = rate(ud(0.0, 0.05));
    r.f[kDstHostRerror] = rate(ud(0.0, 0.08));
    r.f[kDstHostSrvRerror] = rate(ud(0.0, 0.08));
    return r;
  }

  void push(Record r, const std::string& name) {
    r.label = name + ".";
    ++name_counts[name];
    out.push_back(std::move(r));
  }

  // ----------------------------------------------------------- normal side

  void normal_web() {
    const std::size_t len = ui(3, 8);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "http", "SF");
      r.f[kDuration] = num(ui(0, 6));
      r.f[kSrcBytes] = num(ui(120, 2500));
      r.f[kDstBytes] = num(ui(300, 20000));
      r.f[kLoggedIn] = "1";
      r.f[kCount] = num(ui(1, 30));
      r.f[kSrvCount] = num(ui(1, 30));
      if (chance(0.12)) r.f[kFailedLogins] = "1";
      if (chance(0.08)) r.f[kHot] = num(ui(1, 2));
      push(r, "normal");
    }
  }

  void normal_dns() {
    const std::size_t len = ui(2, 6);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("udp", "domain_u", "SF");
      r.f[kSrcBytes] = num(ui(40, 150));
      r.f[kDstBytes] = num(ui(60, 400));
      r.f[kCount] = num(ui(2, 60));
      r.f[kSrvCount] = num(ui(2, 60));
      push(r, "normal");
    }
  }

  void normal_smtp() {
    const std::size_t len = ui(2, 5);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "smtp", "SF");
      r.f[kDuration] = num(ui(1, 12));
      r.f[kSrcBytes] = num(ui(300, 4000));
      r.f[kDstBytes] = num(ui(250, 900));
      r.f[kLoggedIn] = "1";
      r.f[kCount] = num(ui(1, 12));
      r.f[kSrvCount] = num(ui(1, 12));
      push(r, "normal");
    }
  }

  void normal_ftp() {
    const std::size_t len = ui(2, 6);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "ftp_data", "SF");
      r.f[kDuration] = num(ui(0, 40));
      r.f[kSrcBytes] = num(ui(800, 150000));
      r.f[kDstBytes] = num(ui(0, 2000));
      r.f[kLoggedIn] = "1";
      r.f[kCount] = num(ui(1, 10));
      r.f[kSrvCount] = num(ui(1, 10));
      if (chance(0.05)) r.f[kGuestLogin] = "1";
      if (chance(0.06)) r.f[kFileCreations] = "1";
      if (chance(0.04)) r.f[kAccessFiles] = "1";
      push(r, "normal");
    }
  }

  void normal_ping() {
    const std::size_t len = ui(2, 6);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("icmp", "ecr_i", "SF");
      r.f[kSrcBytes] = num(ui(8, 64));
      // Monitoring hosts sweep in bursts, so a slice of legitimate icmp
      // carries flood-grade connection counters.
      const std::size_t cnt = chance(0.15) ? ui(100, 300) : ui(1, 34);
      r.f[kCount] = num(cnt);
      r.f[kSrvCount] = num(cnt);
      push(r, "normal");
    }
  }

  void normal_misc() {
    const std::size_t len = ui(1, 3);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "other", "SF");
      r.f[kDuration] = num(ui(0, 20));
      r.f[kSrcBytes] = num(ui(30, 1200));
      r.f[kDstBytes] = num(ui(0, 1500));
      r.f[kCount] = num(ui(1, 8));
      r.f[kSrvCount] = num(ui(1, 8));
      push(r, "normal");
    }
  }

  // A single legitimate bulk transfer: far out on duration and volume, so a
  // record-level sphere must either flag it or grow to swallow it.
  void normal_weird() {
    Record r = base("tcp", chance(0.7) ? "ftp_data" : "http", "SF");
    r.f[kDuration] = num(ui(250, 1100));
    r.f[kSrcBytes] = num(ui(800000, 2600000));
    r.f[kDstBytes] = num(ui(2000, 80000));
    r.f[kLoggedIn] = "1";
    r.f[kCount] = num(ui(1, 6));
    r.f[kSrvCount] = num(ui(1, 6));
    push(r, "normal");
  }

  void normal_stretch(std::size_t target_records) {
    std::size_t emitted = out.size();
    while (out.size() - emitted < target_records) {
      const double pick = rng.uniform();
      if (pick < 0.32) normal_web();
      else if (pick < 0.52) normal_dns();
      else if (pick < 0.61) normal_smtp();
      else if (pick < 0.72) normal_ftp();
      else if (pick < 0.92) normal_ping();
      else normal_misc();
      if (chance(0.55)) normal_weird();
    }
  }

  // ----------------------------------------------------------- attack side

  void neptune_burst() {
    const std::size_t len = ui(55, 110);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "private", "S0");
      r.f[kCount] = num(ui(120, 511));
      r.f[kSrvCount] = num(ui(1, 12));
      r.f[kSerror] = rate(ud(0.92, 1.0));
      r.f[kSrvSerror] = rate(ud(0.92, 1.0));
      r.f[kSameSrv] = rate(ud(0.0, 0.15));
      r.f[kDiffSrv] = rate(ud(0.05, 0.2));
      r.f[kDstHostCount] = "255";
      r.f[kDstHostSerror] = rate(ud(0.9, 1.0));
      r.f[kDstHostSrvSerror] = rate(ud(0.9, 1.0));
      r.f[kDstHostSameSrv] = rate(ud(0.0, 0.1));
      push(r, "neptune");
    }
  }

  // Sustained echo flood. Every record alone stays inside the envelope of
  // legitimate icmp sweeps; what marks the attack is a long stretch holding
  // burst-grade counters at once, which only shows up across a window.
  void smurf_burst() {
    const std::size_t len = ui(160, 280);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("icmp", "ecr_i", "SF");
      r.f[kSrcBytes] = chance(0.5) ? "520" : "1032";
      r.f[kCount] = num(ui(100, 230));
      r.f[kSrvCount] = num(ui(100, 230));
      r.f[kSameSrv] = rate(1.0);
      r.f[kDstHostSameSrv] = rate(ud(0.85, 1.0));
      push(r, "smurf");
    }
  }

  void portsweep_burst() {
    const std::size_t len = ui(50, 85);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "private", "REJ");
      r.f[kSrcBytes] = num(ui(0, 20));
      r.f[kRerror] = rate(ud(0.85, 1.0));
      r.f[kSrvRerror] = rate(ud(0.85, 1.0));
      r.f[kSameSrv] = rate(ud(0.0, 0.15));
      r.f[kDiffSrv] = rate(ud(0.6, 1.0));
      r.f[kCount] = num(ui(1, 6));
      r.f[kSrvCount] = num(ui(1, 3));
      r.f[kDstHostDiffSrv] = rate(ud(0.6, 1.0));
      r.f[kDstHostRerror] = rate(ud(0.8, 1.0));
      r.f[kDstHostSrvRerror] = rate(ud(0.8, 1.0));
      push(r, "portsweep");
    }
  }

  void satan_burst() {
    static const char* services[] = {"http", "ftp", "telnet", "private",
                                     "other"};
    const std::size_t len = ui(40, 65);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", services[ui(0, 4)],
                      chance(0.6) ? "REJ" : "RSTR");
      r.f[kSrcBytes] = num(ui(0, 30));
      r.f[kRerror] = rate(ud(0.7, 1.0));
      r.f[kSrvRerror] = rate(ud(0.7, 1.0));
      r.f[kSameSrv] = rate(ud(0.0, 0.25));
      r.f[kDiffSrv] = rate(ud(0.5, 0.95));
      r.f[kCount] = num(ui(1, 8));
      r.f[kDstHostDiffSrv] = rate(ud(0.5, 0.95));
      r.f[kDstHostRerror] = rate(ud(0.7, 1.0));
      push(r, "satan");
    }
  }

  void guess_passwd_burst() {
    const std::size_t len = ui(12, 26);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", chance(0.6) ? "telnet" : "ftp",
                      chance(0.7) ? "SF" : "RSTO");
      r.f[kDuration] = num(ui(1, 6));
      r.f[kSrcBytes] = num(ui(100, 400));
      r.f[kDstBytes] = num(ui(100, 500));
      r.f[kFailedLogins] = num(ui(3, 6));
      r.f[kCount] = num(ui(1, 6));
      push(r, "guess_passwd");
    }
  }

  void warezclient_run() {
    const std::size_t len = ui(8, 16);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "ftp", "SF");
      r.f[kDuration] = num(ui(5, 200));
      r.f[kSrcBytes] = num(ui(1000, 600000));
      r.f[kDstBytes] = num(ui(200, 4000));
      r.f[kLoggedIn] = "1";
      r.f[kGuestLogin] = "1";
      r.f[kHot] = num(ui(5, 30));
      r.f[kCount] = num(ui(1, 5));
      push(r, "warezclient");
    }
  }

  void buffer_overflow_run() {
    const std::size_t len = ui(2, 4);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", "telnet", "SF");
      r.f[kDuration] = num(ui(30, 300));
      r.f[kSrcBytes] = num(ui(1000, 6000));
      r.f[kDstBytes] = num(ui(300, 3000));
      r.f[kLoggedIn] = "1";
      r.f[kRootShell] = "1";
      r.f[kCompromised] = num(ui(1, 3));
      r.f[kFileCreations] = num(ui(1, 4));
      r.f[kNumShells] = num(ui(1, 2));
      push(r, "buffer_overflow");
    }
  }

  void rootkit_run() {
    const std::size_t len = ui(2, 4);
    for (std::size_t k = 0; k < len; ++k) {
      Record r = base("tcp", chance(0.5) ? "telnet" : "ftp", "SF");
      r.f[kDuration] = num(ui(10, 150));
      r.f[kSrcBytes] = num(ui(500, 5000));
      r.f[kLoggedIn] = "1";
      r.f[kNumRoot] = num(ui(1, 6));
      r.f[kCompromised] = num(ui(1, 2));
      r.f[kFileCreations] = num(ui(1, 5));
      push(r, "rootkit");
    }
  }
};

struct Quota {
  std::size_t dos = 2850;
  std::size_t probe = 710;
  std::size_t r2l = 400;
  std::size_t u2r = 100;
};

std::size_t family_count(const Emitter& e,
                         std::initializer_list<const char*> names) {
  std::size_t total = 0;
  for (const char* n : names) {
    const auto it = e.name_counts.find(n);
    if (it != e.name_counts.end()) total += it->second;
  }
  return total;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic desk-scale connection-record fixture generator"};
  std::string out_path = "data/fixtures/kdd_desk.csv";
  std::string manifest_path = "data/fixtures/kdd_desk.manifest.json";
  std::uint64_t seed = 20250817;
  app.add_option("--out", out_path, "CSV to write");
  app.add_option("--manifest", manifest_path, "manifest JSON to write");
  app.add_option("--seed", seed, "RNG seed");
  CLI11_PARSE(app, argc, argv);

  Emitter e(seed);
  const Quota quota;

  e.normal_stretch(200);
  while (true) {
    const std::size_t dos = family_count(e, {"neptune", "smurf"});
    const std::size_t probe = family_count(e, {"portsweep", "satan"});
    const std::size_t r2l = family_count(e, {"guess_passwd", "warezclient"});
    const std::size_t u2r = family_count(e, {"buffer_overflow", "rootkit"});
    const bool dos_left = dos < quota.dos;
    const bool probe_left = probe < quota.probe;
    const bool r2l_left = r2l < quota.r2l;
    const bool u2r_left = u2r < quota.u2r;
    if (!dos_left && !probe_left && !r2l_left && !u2r_left) break;

    // One multi-phase episode: scans lead, intrusions follow, floods close.
    // Chaining phases back to back keeps the attack/normal boundaries rare,
    // so a windowed view sees long clean stretches and dense attack blocks.
    if (probe_left && e.chance(0.7))
      e.chance(0.5) ? e.portsweep_burst() : e.satan_burst();
    if (r2l_left && e.chance(0.8))
      e.chance(0.55) ? e.guess_passwd_burst() : e.warezclient_run();
    if (u2r_left)
      e.chance(0.6) ? e.buffer_overflow_run() : e.rootkit_run();
    if (dos_left && e.chance(0.8))
      e.chance(0.6) ? e.neptune_burst() : e.smurf_burst();

    e.normal_stretch(e.ui(150, 260));
  }
  e.normal_stretch(200);

  std::filesystem::create_directories(
      std::filesystem::path(out_path).parent_path());
  {
    std::ofstream csv(out_path, std::ios::binary | std::ios::trunc);
    if (!csv) {
      std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
      return 1;
    }
    for (const Record& r : e.out) {
      for (const std::string& field : r.f) csv << field << ',';
      csv << r.label << '\n';
    }
  }

  static const std::map<std::string, std::string> family_of = {
      {"normal", "normal"},         {"neptune", "dos"},
      {"smurf", "dos"},             {"portsweep", "probe"},
      {"satan", "probe"},           {"guess_passwd", "r2l"},
      {"warezclient", "r2l"},       {"buffer_overflow", "u2r"},
      {"rootkit", "u2r"}};
  std::map<std::string, std::size_t> families;
  for (const auto& [name, count] : e.name_counts)
    families[family_of.at(name)] += count;

  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  manifest << "{\n";
  manifest << "  \"file\": \"" << std::filesystem::path(out_path).filename().string()
           << "\",\n";
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    lstmsvdd::fnv1a64_file(out_path)));
  manifest << "  \"fnv1a64\": \"" << hash << "\",\n";
  manifest << "  \"seed\": " << seed << ",\n";
  manifest << "  \"total\": " << e.out.size() << ",\n";
  manifest << "  \"counts\": {";
  const char* families_order[] = {"normal", "dos", "probe", "r2l", "u2r"};
  for (std::size_t k = 0; k < 5; ++k)
    manifest << (k ? ", " : "") << '"' << families_order[k]
             << "\": " << families[families_order[k]];
  manifest << "},\n";
  manifest << "  \"attack_names\": {";
  bool first = true;
  for (const auto& [name, count] : e.name_counts) {
    if (name == "normal") continue;
    manifest << (first ? "" : ", ") << '"' << name << "\": " << count;
    first = false;
  }
  manifest << "}\n}\n";

  std::printf("wrote %s (%zu records) and %s\n", out_path.c_str(),
              e.out.size(), manifest_path.c_str());
  for (std::size_t k = 0; k < 5; ++k)
    std::printf("  %-7s %6zu\n", families_order[k],
                families[families_order[k]]);
  return 0;
}
