#include "CLI11.hpp"
#include "json.hpp"

#include "lstmsvdd/baselines.hpp"
#include "lstmsvdd/cache.hpp"
#include "lstmsvdd/dataset.hpp"
#include "lstmsvdd/eval.hpp"
#include "lstmsvdd/model_io.hpp"
#include "lstmsvdd/trainer.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace lstmsvdd;

namespace {

// ---------------------------------------------------------------- plumbing

std::string iso8601_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

// Ordered key → already-encoded JSON value.
using ManifestFields = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const std::string& path, const ManifestFields& fields) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << "{\n";
  for (std::size_t k = 0; k < fields.size(); ++k)
    out << "  " << json_quote(fields[k].first) << ": " << fields[k].second
        << (k + 1 < fields.size() ? ",\n" : "\n");
  out << "}\n";
  if (!out) throw std::runtime_error("manifest write failed for " + path);
}

std::string json_array(const std::vector<std::string>& items, bool quoted) {
  std::string out = "[";
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += ", ";
    out += quoted ? json_quote(items[k]) : items[k];
  }
  return out + "]";
}

std::string default_cache_dir() {
  const char* root = std::getenv("LSTMSVDD_CACHE_ROOT");
  return root && *root ? root : "cache";
}

// key=value lines applied to a subcommand's own options. Values from the
// file only fill options the command line left untouched, so flags win.
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string line;
  std::size_t lineno = 0;
  const auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path + ":" + std::to_string(lineno);
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw std::invalid_argument(where + ": " + sub.get_name() +
                                  " has no option --" + key);
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string windows_file(const std::string& dir, std::size_t lookback,
                         std::size_t stride, WindowLabelRule rule) {
  return dir + "/windows-L" + std::to_string(lookback) + "-S" +
         std::to_string(stride) + "-" + to_string(rule) + ".bin";
}

struct CacheSource {
  std::string input;
  std::uint64_t hash = 0;
};

void save_source(const std::string& dir, const CacheSource& src) {
  write_manifest(dir + "/source.json",
                 {{"input", json_quote(src.input)},
                  {"fnv1a64", json_quote(hex64(src.hash))}});
}

std::optional<CacheSource> load_source(const std::string& dir) {
  std::ifstream in(dir + "/source.json");
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    CacheSource src;
    src.input = j.at("input").get<std::string>();
    src.hash = std::stoull(j.at("fnv1a64").get<std::string>(), nullptr, 16);
    return src;
  } catch (const std::exception&) {
    throw std::runtime_error(dir + "/source.json is damaged");
  }
}

void print_summary(const DatasetSummary& summary) {
  std::printf("%-8s %10s %9s\n", "class", "records", "percent");
  for (ClassLabel c : kReportClasses)
    std::printf("%-8s %10zu %8.3f%%\n", to_string(c), summary.count(c),
                summary.percent(c));
  if (summary.count(ClassLabel::Unknown) > 0)
    std::printf("%-8s %10zu %8.3f%%\n", "unknown",
                summary.count(ClassLabel::Unknown),
                summary.percent(ClassLabel::Unknown));
  std::printf("%-8s %10zu\n", "total", summary.total);
  if (summary.malformed > 0)
    std::printf("warning: %zu malformed line(s) skipped\n", summary.malformed);
  if (summary.unknown_names > 0)
    std::printf("warning: %zu record(s) with unmapped attack names\n",
                summary.unknown_names);
}

std::string summary_json(const DatasetSummary& summary) {
  std::string out = "{\n  \"counts\": {";
  bool first = true;
  for (int c = 0; c < 6; ++c) {
    if (!first) out += ", ";
    first = false;
    out += json_quote(to_string(static_cast<ClassLabel>(c))) + ": " +
           std::to_string(summary.counts[static_cast<std::size_t>(c)]);
  }
  out += "},\n  \"total\": " + std::to_string(summary.total);
  out += ",\n  \"malformed\": " + std::to_string(summary.malformed);
  out += ",\n  \"unknown_names\": " + std::to_string(summary.unknown_names);
  out += "\n}\n";
  return out;
}

std::array<double, 5> parse_weights(const std::string& text) {
  std::array<double, 5> weights{};
  std::array<bool, 5> seen{};
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--weights items must look like dos=0.7: " +
                                  item);
    const std::string name = item.substr(0, eq);
    const std::size_t k = report_index(class_label_from_string(name));
    if (seen[k])
      throw std::invalid_argument("--weights names " + name + " twice");
    seen[k] = true;
    weights[k] = std::stod(item.substr(eq + 1));
  }
  for (std::size_t k = 0; k < 5; ++k)
    if (!seen[k])
      throw std::invalid_argument(
          "--weights must name all five classes (missing " +
          std::string(to_string(kReportClasses[k])) + ")");
  return weights;
}

std::uint64_t cache_encoder_hash(const std::string& dir) {
  return fs::exists(dir + "/encoder.json")
             ? encoder_hash(load_encoder(dir + "/encoder.json"))
             : 0;
}

std::vector<SequenceWindow> load_windows_or_die(const std::string& dir,
                                                const WindowCacheKey& key) {
  const std::string path =
      windows_file(dir, key.lookback, key.stride, key.rule);
  auto windows = load_window_cache(path, key);
  if (!windows)
    throw std::runtime_error(
        path + " is missing or stale; run ingest with --lookback " +
        std::to_string(key.lookback) + " --stride " +
        std::to_string(key.stride) + " first");
  if (windows->empty())
    throw std::runtime_error(path + " holds no windows");
  return std::move(*windows);
}

// ------------------------------------------------------------------ ingest

struct IngestArgs {
  std::string input;
  std::string cache = default_cache_dir();
  std::size_t lookback = 1;
  std::size_t stride = 1;
  std::string rule = "last";
  std::string encoder_from;
};

int run_ingest(const IngestArgs& args) {
  const std::string started = iso8601_now();
  const WindowLabelRule rule = window_label_rule_from_string(args.rule);

  const ParsedDataset data = parse_kdd(args.input);
  if (data.records.empty())
    throw std::runtime_error(args.input + " contains no records");
  print_summary(data.summary);

  fs::create_directories(args.cache);
  const std::uint64_t file_hash = fnv1a64_file(args.input);
  if (const auto existing = load_source(args.cache)) {
    if (existing->hash != file_hash)
      throw std::runtime_error(args.cache + " already caches " +
                               existing->input +
                               "; use a fresh --cache directory per input");
  } else {
    save_source(args.cache, {args.input, file_hash});
  }

  const std::string encoder_path = args.cache + "/encoder.json";
  FeatureEncoder enc;
  if (!args.encoder_from.empty()) {
    const std::string from = fs::is_directory(args.encoder_from)
                                 ? args.encoder_from + "/encoder.json"
                                 : args.encoder_from;
    enc = load_encoder(from);
    if (fs::exists(encoder_path) &&
        encoder_hash(load_encoder(encoder_path)) != encoder_hash(enc))
      throw std::runtime_error(args.cache +
                               " already holds a different encoder");
    save_encoder(enc, encoder_path);
    std::printf("encoder: imported from %s (fnv1a64 %s)\n", from.c_str(),
                hex64(encoder_hash(enc)).c_str());
  } else if (fs::exists(encoder_path)) {
    enc = load_encoder(encoder_path);
    std::printf("encoder: reusing %s (fnv1a64 %s)\n", encoder_path.c_str(),
                hex64(encoder_hash(enc)).c_str());
  } else {
    enc = build_encoder(data.records);
    save_encoder(enc, encoder_path);
    std::printf("encoder: built, p = %zu (fnv1a64 %s)\n", enc.p,
                hex64(encoder_hash(enc)).c_str());
    if (enc.constant_numeric_columns() > 0)
      std::fprintf(stderr,
                   "warning: %zu numeric column(s) constant in this input; "
                   "they encode to 0\n",
                   enc.constant_numeric_columns());
  }

  const WindowCacheKey key{file_hash, encoder_hash(enc), args.lookback,
                           args.stride, rule};
  const std::string wpath =
      windows_file(args.cache, args.lookback, args.stride, rule);

  std::size_t window_count = 0;
  if (const auto hit = load_window_cache(wpath, key)) {
    window_count = hit->size();
    std::printf("cache hit: %s already holds %zu windows\n", wpath.c_str(),
                window_count);
  } else {
    EncodeStats stats;
    const auto windows =
        windowize(data.records, enc, args.lookback, args.stride, rule, &stats);
    if (windows.empty())
      std::fprintf(stderr,
                   "warning: fewer records (%zu) than lookback (%zu); no "
                   "windows written\n",
                   data.records.size(), args.lookback);
    if (stats.oov_values > 0)
      std::fprintf(stderr,
                   "warning: %zu out-of-vocabulary symbolic value(s) encoded "
                   "as all-zero blocks\n",
                   stats.oov_values);
    if (stats.clipped > 0)
      std::fprintf(stderr, "warning: %zu numeric value(s) clipped to [0,1]\n",
                   stats.clipped);
    save_window_cache(wpath, key, windows);
    window_count = windows.size();
    std::printf("cache written: %s (%zu windows)\n", wpath.c_str(),
                window_count);
  }

  std::ofstream(args.cache + "/summary.json", std::ios::trunc)
      << summary_json(data.summary);

  write_manifest(
      args.cache + "/manifest-ingest.json",
      {{"command", json_quote("ingest")},
       {"input", json_quote(args.input)},
       {"input_fnv1a64", json_quote(hex64(file_hash))},
       {"encoder_fnv1a64", json_quote(hex64(encoder_hash(enc)))},
       {"lookback", std::to_string(args.lookback)},
       {"stride", std::to_string(args.stride)},
       {"label_rule", json_quote(to_string(rule))},
       {"windows", std::to_string(window_count)},
       {"outputs",
        json_array({wpath, args.cache + "/encoder.json",
                    args.cache + "/summary.json"},
                   true)},
       {"started", json_quote(started)},
       {"finished", json_quote(iso8601_now())}});
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string cache = default_cache_dir();
  std::string out = "model.json";
  std::string model = "lstm";
  std::size_t lookback = 1;
  std::size_t stride = 1;
  std::string pooling = "mean";
  std::string rule = "last";
  double chi = 1000.0;
  double nu = 0.05;
  double lr = 1e-3;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  std::size_t batch_size = 0;
  double stop_tol = 1e-7;
};

int run_train(const TrainArgs& args) {
  const std::string started = iso8601_now();

  const bool is_lstm = args.model == "lstm";
  if (!is_lstm) {
    if (args.lookback != 1)
      throw std::invalid_argument("--model " + args.model +
                                  " scores single records; it requires "
                                  "--lookback 1");
    if (args.pooling != "mean")
      throw std::invalid_argument("--model " + args.model +
                                  " does not pool a sequence; --pooling " +
                                  args.pooling + " is meaningless here");
  }

  const auto source = load_source(args.cache);
  if (!source)
    throw std::runtime_error(args.cache +
                             " has no source.json; run ingest (or synth) "
                             "first");
  const std::uint64_t enc_hash = cache_encoder_hash(args.cache);
  const WindowLabelRule rule = window_label_rule_from_string(args.rule);

  const WindowCacheKey key{source->hash, enc_hash, args.lookback, args.stride,
                           rule};
  const auto windows = load_windows_or_die(args.cache, key);

  const WindowSplit split =
      normal_train_split(windows, args.train_fraction, args.seed);
  std::printf("training on %zu all-normal windows (%zu held out)\n",
              split.train.size(), split.holdout.size());

  TrainConfig config;
  config.learning_rate = args.lr;
  config.epochs = args.epochs;
  config.chi = args.chi;
  config.nu = args.nu;
  config.pooling = pooling_from_string(args.pooling);
  config.lookback = args.lookback;
  config.seed = args.seed;
  config.batch_mode = args.batch_size > 0 ? BatchMode::MiniBatch
                                          : BatchMode::Full;
  config.batch_size = args.batch_size;
  config.stop_tol = args.stop_tol;
  if (args.model == "ann256") config.hidden_size = 256;
  if (args.model == "ann1024") config.hidden_size = 1024;

  const EncoderMeta meta{split.train.front().feature_dim(), enc_hash};
  const EpochObserver observer = [](std::size_t epoch, const LstmParams&,
                                    const SphereParams&, double objective) {
    std::printf("epoch %zu objective %.9f\n", epoch, objective);
  };

  TrainedModel model;
  if (is_lstm)
    model = fit(split.train, config, meta, observer);
  else if (args.model == "svdd")
    model = svdd_only_fit(split.train, config, meta);
  else
    model = ann_svdd_fit(split.train, config, meta);

  save_model(model, args.out);

  const std::string log_path = args.out + ".log.csv";
  {
    std::ofstream log(log_path, std::ios::trunc);
    log << "epoch,objective\n";
    char buf[40];
    for (std::size_t e = 0; e < model.training_log.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e,
                    model.training_log[e]);
      log << buf;
    }
  }

  write_manifest(
      args.out + ".manifest.json",
      {{"command", json_quote("train")},
       {"cache", json_quote(args.cache)},
       {"input", json_quote(source->input)},
       {"input_fnv1a64", json_quote(hex64(source->hash))},
       {"encoder_fnv1a64", json_quote(hex64(enc_hash))},
       {"model", json_quote(args.model)},
       {"lookback", std::to_string(args.lookback)},
       {"stride", std::to_string(args.stride)},
       {"pooling", json_quote(args.pooling)},
       {"chi", std::to_string(args.chi)},
       {"nu", std::to_string(args.nu)},
       {"lr", std::to_string(args.lr)},
       {"epochs", std::to_string(args.epochs)},
       {"seed", std::to_string(args.seed)},
       {"train_fraction", std::to_string(args.train_fraction)},
       {"batch_size", std::to_string(args.batch_size)},
       {"train_windows", std::to_string(split.train.size())},
       {"holdout_windows", std::to_string(split.holdout.size())},
       {"outputs", json_array({args.out, log_path}, true)},
       {"started", json_quote(started)},
       {"finished", json_quote(iso8601_now())}});

  std::printf("trained %s in %zu epoch(s); final objective %.9f; wrote %s\n",
              args.model.c_str(), model.training_log.size() - 1,
              model.training_log.back(), args.out.c_str());
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string cache = default_cache_dir();
  std::string weights;
  std::string out;
  std::string name;
  std::size_t stride = 1;
  std::string rule = "last";
};

int run_eval(const EvalArgs& args) {
  const std::string started = iso8601_now();

  const TrainedModel model = load_model(args.model);
  const auto source = load_source(args.cache);
  if (!source)
    throw std::runtime_error(args.cache + " has no source.json; ingest the "
                                          "evaluation data first");
  const std::uint64_t enc_hash = cache_encoder_hash(args.cache);
  if (model.encoder.hash != 0 && model.encoder.hash != enc_hash)
    throw std::runtime_error(
        "encoder mismatch: model was trained against fnv1a64 " +
        hex64(model.encoder.hash) + " but " + args.cache + " holds " +
        hex64(enc_hash) + "; score against matching features only");

  const WindowCacheKey key{source->hash, enc_hash, model.config.lookback,
                           args.stride,
                           window_label_rule_from_string(args.rule)};
  const auto windows = load_windows_or_die(args.cache, key);

  const auto scores = score(model, windows);
  std::vector<ClassLabel> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) labels.push_back(w.label);

  const bool default_weights = args.weights.empty();
  const std::array<double, 5> weights =
      default_weights ? kTestSplitWeights : parse_weights(args.weights);

  const EvalReport report = build_report(scores, labels, weights);

  std::printf("w-sum weights (%s; renormalized over present classes):",
              default_weights ? "built-in test-split distribution"
                              : "explicit --weights input");
  for (std::size_t k = 0; k < 5; ++k)
    std::printf(" %s=%.6f", to_string(kReportClasses[k]),
                report.weights_used[k]);
  std::printf("\n");

  const std::string row_name =
      args.name.empty() ? fs::path(args.model).stem().string() : args.name;
  const std::vector<std::pair<std::string, EvalReport>> rows = {
      {row_name, report}};
  std::fputs(report_table_text(rows).c_str(), stdout);

  if (!args.out.empty()) {
    std::ofstream(args.out, std::ios::trunc) << report_table_csv(rows);
    write_manifest(
        args.out + ".manifest.json",
        {{"command", json_quote("eval")},
         {"model", json_quote(args.model)},
         {"cache", json_quote(args.cache)},
         {"input", json_quote(source->input)},
         {"input_fnv1a64", json_quote(hex64(source->hash))},
         {"encoder_fnv1a64", json_quote(hex64(enc_hash))},
         {"windows", std::to_string(windows.size())},
         {"w_sum", std::to_string(report.weighted)},
         {"outputs", json_array({args.out}, true)},
         {"started", json_quote(started)},
         {"finished", json_quote(iso8601_now())}});
  }
  return 0;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::size_t normal = 400;
  std::size_t anomalous = 0;
  std::size_t seq_len = 5;
  std::uint64_t seed = 42;
  std::string out = "synth";
};

int run_synth(const SynthArgs& args) {
  const std::string started = iso8601_now();

  const auto windows =
      gen_synthetic(args.normal, args.anomalous, args.seq_len, args.seed);

  fs::create_directories(args.out);
  const std::string params = "synthetic:normal=" + std::to_string(args.normal) +
                             ",anomalous=" + std::to_string(args.anomalous) +
                             ",seq_len=" + std::to_string(args.seq_len) +
                             ",seed=" + std::to_string(args.seed);
  const std::uint64_t file_hash = fnv1a64(params);
  save_source(args.out, {params, file_hash});

  const WindowCacheKey key{file_hash, 0, args.seq_len, 1,
                           WindowLabelRule::LastRecord};
  const std::string wpath =
      windows_file(args.out, args.seq_len, 1, WindowLabelRule::LastRecord);
  save_window_cache(wpath, key, windows);

  std::printf("synthetic corpus: %zu normal + %zu anomalous windows of "
              "length %zu -> %s\n",
              args.normal, args.anomalous, args.seq_len, wpath.c_str());

  write_manifest(args.out + "/manifest.json",
                 {{"command", json_quote("synth")},
                  {"normal", std::to_string(args.normal)},
                  {"anomalous", std::to_string(args.anomalous)},
                  {"seq_len", std::to_string(args.seq_len)},
                  {"seed", std::to_string(args.seed)},
                  {"source_fnv1a64", json_quote(hex64(file_hash))},
                  {"outputs", json_array({wpath}, true)},
                  {"started", json_quote(started)},
                  {"finished", json_quote(iso8601_now())}});
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradArgs {
  std::uint64_t seed = 1;
  std::string scale = "tiny";
  bool corrupt = false;
};

struct WorstError {
  double rel = 0.0;
  std::string coordinate = "-";
  std::size_t checked = 0;

  void consider(double analytic, double fd, const std::string& name) {
    ++checked;
    const double denom =
        std::max({std::fabs(analytic), std::fabs(fd), 1e-8});
    const double rel_err = std::fabs(analytic - fd) / denom;
    if (rel_err > rel) {
      rel = rel_err;
      coordinate = name;
    }
  }
};

// Central difference of f after nudging *param by ±step.
template <typename F>
double central_diff(const F& f, double* param, double step) {
  const double saved = *param;
  *param = saved + step;
  const double hi = f();
  *param = saved - step;
  const double lo = f();
  *param = saved;
  return (hi - lo) / (2.0 * step);
}

std::vector<std::pair<std::string, double*>> lstm_param_refs(LstmParams& p) {
  std::vector<std::pair<std::string, double*>> refs;
  const std::pair<std::string, GateParams*> gates[4] = {
      {"z", &p.block}, {"i", &p.input_gate}, {"f", &p.forget_gate},
      {"o", &p.output_gate}};
  for (const auto& [tag, gate] : gates) {
    for (std::size_t k = 0; k < gate->w.data.size(); ++k)
      refs.emplace_back(tag + ".w[" + std::to_string(k) + "]",
                        &gate->w.data[k]);
    for (std::size_t k = 0; k < gate->u.data.size(); ++k)
      refs.emplace_back(tag + ".u[" + std::to_string(k) + "]",
                        &gate->u.data[k]);
    for (std::size_t k = 0; k < gate->b.size(); ++k)
      refs.emplace_back(tag + ".b[" + std::to_string(k) + "]", &gate->b[k]);
  }
  return refs;
}

std::vector<double> lstm_grad_values(const LstmGrads& g) {
  std::vector<double> out;
  const GateParams* gates[4] = {&g.block, &g.input_gate, &g.forget_gate,
                                &g.output_gate};
  for (const GateParams* gate : gates) {
    out.insert(out.end(), gate->w.data.begin(), gate->w.data.end());
    out.insert(out.end(), gate->u.data.begin(), gate->u.data.end());
    out.insert(out.end(), gate->b.begin(), gate->b.end());
  }
  return out;
}

SequenceWindow random_window(std::uint64_t id, std::size_t len, std::size_t p,
                             Rng& rng) {
  std::vector<Vector> steps(len, Vector(p));
  for (auto& step : steps)
    for (auto& x : step) x = rng.gaussian();
  return SequenceWindow(id, std::move(steps), ClassLabel::Normal, true);
}

bool report_suite(const char* name, const WorstError& worst, double tol) {
  const bool ok = worst.rel <= tol;
  std::printf("%-22s %5zu partials  worst rel err %.3e at %-12s %s (tol "
              "%.0e)\n",
              name, worst.checked, worst.rel, worst.coordinate.c_str(),
              ok ? "pass" : "FAIL", tol);
  return ok;
}

int run_gradcheck(const GradArgs& args) {
  bool all_ok = true;

  // Sequence encoder backward against central differences, every pooling.
  {
    WorstError worst;
    Rng rng(args.seed);
    const std::size_t m = 4, p = 3;
    LstmParams params(m, p);
    auto refs = lstm_param_refs(params);
    for (auto& [name, ptr] : refs) *ptr = 0.4 * rng.gaussian();
    const SequenceWindow w = random_window(0, 5, p, rng);
    Vector probe(m);
    for (auto& x : probe) x = rng.gaussian();

    for (Pooling pooling : {Pooling::Mean, Pooling::Last, Pooling::Max}) {
      const auto loss = [&]() {
        return dot(encode_sequence(w, params, pooling), probe);
      };
      LstmTape tape;
      encode_sequence(w, params, pooling, &tape);
      LstmGrads grads = zero_grads(params);
      encode_backward(tape, w, params, pooling, probe, grads);
      const auto analytic = lstm_grad_values(grads);
      for (std::size_t k = 0; k < refs.size(); ++k)
        worst.consider(analytic[k], central_diff(loss, refs[k].second, 1e-5),
                       std::string(to_string(pooling)) + ":" + refs[k].first);
    }
    all_ok &= report_suite("sequence encoder", worst, 1e-4);
  }

  // Sphere head gradients.
  {
    WorstError worst;
    Rng rng(args.seed + 1);
    const std::size_t n = 8, m = 4;
    std::vector<Vector> encodings(n, Vector(m));
    for (auto& e : encodings)
      for (auto& x : e) x = rng.gaussian();
    SphereParams sphere;
    sphere.center.assign(m, 0.0);
    for (auto& x : sphere.center) x = 0.3 * rng.gaussian();
    sphere.radius = 1.1;
    sphere.nu = 0.3;
    sphere.chi = 10.0;

    const auto loss = [&]() { return objective(encodings, sphere); };
    const ObjectiveGrads grads = objective_gradients(encodings, sphere);
    worst.consider(grads.d_radius, central_diff(loss, &sphere.radius, 1e-6),
                   "radius");
    for (std::size_t k = 0; k < m; ++k)
      worst.consider(grads.d_center[k],
                     central_diff(loss, &sphere.center[k], 1e-6),
                     "center[" + std::to_string(k) + "]");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k)
        worst.consider(grads.d_encodings[i][k],
                       central_diff(loss, &encodings[i][k], 1e-6),
                       "h[" + std::to_string(i) + "][" + std::to_string(k) +
                           "]");
    all_ok &= report_suite("sphere head", worst, 1e-4);
  }

  // Joint objective through encoder and head together.
  {
    WorstError worst;
    Rng rng(args.seed + 2);
    const std::size_t m = 3, p = 2;
    TrainConfig config;
    config.hidden_size = m;
    config.chi = 10.0;
    config.nu = 0.3;
    config.seed = args.seed + 2;
    LstmParams params = init_lstm_params(config, p, rng);
    std::vector<SequenceWindow> windows;
    for (std::size_t k = 0; k < 4; ++k)
      windows.push_back(random_window(k, 2 + k, p, rng));

    std::vector<Vector> encodings;
    for (const auto& w : windows)
      encodings.push_back(encode_sequence(w, params, Pooling::Mean));
    SphereParams sphere = init_sphere(encodings, config.nu, config.chi);
    sphere.radius = std::max(sphere.radius, 0.25);

    const auto loss = [&]() {
      std::vector<Vector> enc;
      for (const auto& w : windows)
        enc.push_back(encode_sequence(w, params, Pooling::Mean));
      return objective(enc, sphere);
    };

    const auto analytic_lstm = [&]() {
      std::vector<Vector> enc;
      for (const auto& w : windows)
        enc.push_back(encode_sequence(w, params, Pooling::Mean));
      const ObjectiveGrads g = objective_gradients(enc, sphere);
      LstmGrads grads = zero_grads(params);
      LstmTape tape;
      for (std::size_t k = 0; k < windows.size(); ++k) {
        encode_sequence(windows[k], params, Pooling::Mean, &tape);
        encode_backward(tape, windows[k], params, Pooling::Mean,
                        g.d_encodings[k], grads);
      }
      return std::make_pair(lstm_grad_values(grads), g);
    };

    auto [lstm_grads, head_grads] = analytic_lstm();
    if (args.corrupt) lstm_grads[0] += 1e-3;

    auto refs = lstm_param_refs(params);
    for (std::size_t k = 0; k < refs.size(); ++k)
      worst.consider(lstm_grads[k],
                     central_diff(loss, refs[k].second, 1e-5), refs[k].first);
    worst.consider(head_grads.d_radius,
                   central_diff(loss, &sphere.radius, 1e-6), "radius");
    for (std::size_t k = 0; k < m; ++k)
      worst.consider(head_grads.d_center[k],
                     central_diff(loss, &sphere.center[k], 1e-6),
                     "center[" + std::to_string(k) + "]");
    all_ok &= report_suite("joint objective", worst, 1e-4);
  }

  // Feedforward baseline gradients.
  {
    WorstError worst;
    Rng rng(args.seed + 3);
    const std::size_t m = 5, p = 3;
    AnnParams params(m, p);
    for (auto& v : params.w1.data) v = 0.6 * rng.gaussian();
    for (auto& v : params.b1) v = 0.3 * rng.gaussian();
    std::vector<SequenceWindow> records;
    for (std::size_t k = 0; k < 6; ++k)
      records.push_back(random_window(k, 1, p, rng));
    SphereParams sphere;
    sphere.center.assign(m, 0.1);
    sphere.radius = 0.8;
    sphere.nu = 0.3;
    sphere.chi = 10.0;

    const auto loss = [&]() {
      std::vector<Vector> enc;
      for (const auto& r : records)
        enc.push_back(ann_encode(r.steps.front(), params));
      return objective(enc, sphere);
    };
    const AnnGrads grads = ann_objective_gradients(records, params, sphere);
    for (std::size_t k = 0; k < params.w1.data.size(); ++k)
      worst.consider(grads.dw1.data[k],
                     central_diff(loss, &params.w1.data[k], 1e-6),
                     "w1[" + std::to_string(k) + "]");
    for (std::size_t k = 0; k < params.b1.size(); ++k)
      worst.consider(grads.db1[k], central_diff(loss, &params.b1[k], 1e-6),
                     "b1[" + std::to_string(k) + "]");
    worst.consider(grads.sphere.d_radius,
                   central_diff(loss, &sphere.radius, 1e-6), "radius");
    all_ok &= report_suite("feedforward baseline", worst, 1e-4);
  }

  if (!all_ok) {
    std::fprintf(stderr, "gradient check FAILED\n");
    return 1;
  }
  std::printf("all gradient checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-class sequence anomaly detection: an LSTM encoder trained "
               "jointly with a smoothed minimum-volume hypersphere"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "Parse a connection-record CSV, encode it, and cache windows");
  cmd_ingest->add_option("--input", ingest.input, "42-field CSV to ingest")
      ->required();
  cmd_ingest->add_option("--cache", ingest.cache,
                         "cache directory (default $LSTMSVDD_CACHE_ROOT or "
                         "./cache)");
  cmd_ingest->add_option("--lookback", ingest.lookback,
                         "records per window (>= 1)");
  cmd_ingest->add_option("--stride", ingest.stride, "window step (>= 1)");
  cmd_ingest->add_option("--rule", ingest.rule, "window label rule")
      ->check(CLI::IsMember({"last", "majority-attack"}));
  cmd_ingest->add_option("--encoder-from", ingest.encoder_from,
                         "reuse the encoder from this file or cache dir");

  TrainArgs train;
  auto* cmd_train =
      app.add_subcommand("train", "Fit a model on the all-normal window split");
  cmd_train->add_option("--cache", train.cache, "ingested cache directory");
  cmd_train->add_option("--out", train.out, "model file to write");
  cmd_train->add_option("--model", train.model, "model variant")
      ->check(CLI::IsMember({"lstm", "ann256", "ann1024", "svdd"}));
  cmd_train->add_option("--lookback", train.lookback, "window length")
      ->check(CLI::IsMember({"1", "5", "10"}));
  cmd_train->add_option("--stride", train.stride, "window stride of the cache");
  cmd_train->add_option("--pooling", train.pooling, "sequence pooling")
      ->check(CLI::IsMember({"mean", "last", "max"}));
  cmd_train->add_option("--rule", train.rule, "window label rule of the cache")
      ->check(CLI::IsMember({"last", "majority-attack"}));
  cmd_train->add_option("--chi", train.chi, "smoothing sharpness (> 0)");
  cmd_train->add_option("--nu", train.nu, "volume/slack trade-off in (0,1]");
  cmd_train->add_option("--lr", train.lr, "learning rate");
  cmd_train->add_option("--epochs", train.epochs, "training epochs");
  cmd_train->add_option("--seed", train.seed, "RNG seed");
  cmd_train->add_option("--train-fraction", train.train_fraction,
                        "share of all-normal windows used for training");
  cmd_train->add_option("--batch-size", train.batch_size,
                        "mini-batch size (0 = full batch)");
  cmd_train->add_option("--stop-tol", train.stop_tol,
                        "early-stop tolerance on the 5-epoch objective delta "
                        "(0 disables)");

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand(
      "eval", "Score cached windows with a model and report accuracies");
  cmd_eval->add_option("--model", eval.model, "model file")->required();
  cmd_eval->add_option("--cache", eval.cache, "ingested cache directory");
  cmd_eval->add_option("--weights", eval.weights,
                       "w-sum weights, e.g. normal=0.2,dos=0.4,probe=0.2,"
                       "r2l=0.1,u2r=0.1 (default: test-split distribution)");
  cmd_eval->add_option("--out", eval.out, "also write the report CSV here");
  cmd_eval->add_option("--name", eval.name, "row name in the report");
  cmd_eval->add_option("--stride", eval.stride, "window stride of the cache");
  cmd_eval->add_option("--rule", eval.rule, "window label rule of the cache")
      ->check(CLI::IsMember({"last", "majority-attack"}));

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand(
      "synth", "Generate a labeled synthetic corpus as a window cache");
  cmd_synth->add_option("--normal", synth.normal, "normal window count");
  cmd_synth->add_option("--anomalous", synth.anomalous,
                        "anomalous window count");
  cmd_synth->add_option("--seq-len", synth.seq_len, "records per window");
  cmd_synth->add_option("--seed", synth.seed, "RNG seed");
  cmd_synth->add_option("--out", synth.out, "output cache directory");

  GradArgs grad;
  auto* cmd_grad = app.add_subcommand(
      "gradcheck", "Verify every analytic gradient against central "
                   "finite differences");
  cmd_grad->add_option("--seed", grad.seed, "RNG seed");
  cmd_grad->add_option("--scale", grad.scale, "instance size")
      ->check(CLI::IsMember({"tiny"}));
  cmd_grad->add_flag("--corrupt", grad.corrupt,
                     "negative control: perturb one analytic gradient and "
                     "expect failure");

  std::string config_path;
  for (CLI::App* cmd : {cmd_ingest, cmd_train, cmd_eval, cmd_synth, cmd_grad})
    cmd->add_option("--config", config_path,
                    "key=value file of defaults; explicit flags override it");

  try {
    app.parse(argc, argv);
    if (!config_path.empty())
      apply_config_file(*app.get_subcommands().front(), config_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (*cmd_ingest) return run_ingest(ingest);
    if (*cmd_train) return run_train(train);
    if (*cmd_eval) return run_eval(eval);
    if (*cmd_synth) return run_synth(synth);
    if (*cmd_grad) return run_gradcheck(grad);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 1;
}
