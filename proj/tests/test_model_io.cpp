#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "lstmsvdd/baselines.hpp"
#include "lstmsvdd/model_io.hpp"
#include "lstmsvdd/trainer.hpp"

using namespace lstmsvdd;

namespace {

std::vector<SequenceWindow> tiny_corpus(std::size_t n, std::size_t d,
                                        std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SequenceWindow> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Vector> steps(d, Vector(p));
    for (Vector& s : steps)
      for (double& v : s) v = rng.gaussian();
    out.emplace_back(k, std::move(steps), ClassLabel::Normal, true);
  }
  return out;
}

TrainedModel tiny_lstm_model() {
  TrainConfig config;
  config.hidden_size = 3;
  config.epochs = 2;
  config.chi = 10.0;
  config.nu = 0.4;
  config.seed = 11;
  config.stop_tol = 0.0;
  EncoderMeta meta;
  meta.hash = 0xdeadbeefcafef00dULL;
  return fit(tiny_corpus(5, 3, 2, 7), config, meta);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name)
      : path("model_io_test_" + name + ".json") {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("lstm model round-trips through json byte for byte") {
  const TrainedModel model = tiny_lstm_model();
  const std::string first = model_to_json(model);

  TempPath tmp("lstm");
  save_model(model, tmp.path);
  CHECK(read_file(tmp.path) == first);

  const TrainedModel loaded = load_model(tmp.path);
  CHECK(model_to_json(loaded) == first);

  CHECK(loaded.kind == ModelKind::Lstm);
  CHECK(loaded.pooling == model.pooling);
  CHECK(loaded.lstm.block.w.data == model.lstm.block.w.data);
  CHECK(loaded.lstm.forget_gate.u.data == model.lstm.forget_gate.u.data);
  CHECK(loaded.lstm.output_gate.b == model.lstm.output_gate.b);
  CHECK(loaded.sphere.center == model.sphere.center);
  CHECK(loaded.sphere.radius == model.sphere.radius);
  CHECK(loaded.sphere.nu == model.sphere.nu);
  CHECK(loaded.sphere.chi == model.sphere.chi);
  CHECK(loaded.encoder.input_dim == model.encoder.input_dim);
  CHECK(loaded.encoder.hash == model.encoder.hash);
  CHECK(loaded.config.learning_rate == model.config.learning_rate);
  CHECK(loaded.config.seed == model.config.seed);
  CHECK(loaded.training_log == model.training_log);
}

TEST_CASE("loaded model scores identically") {
  const TrainedModel model = tiny_lstm_model();
  TempPath tmp("rescore");
  save_model(model, tmp.path);
  const TrainedModel loaded = load_model(tmp.path);

  const auto corpus = tiny_corpus(5, 3, 2, 7);
  const auto a = score(model, corpus);
  const auto b = score(loaded, corpus);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].psi == b[k].psi);
    CHECK(a[k].decision == b[k].decision);
  }
}

TEST_CASE("identical training runs serialize identically") {
  const TrainedModel a = tiny_lstm_model();
  const TrainedModel b = tiny_lstm_model();
  CHECK(model_to_json(a) == model_to_json(b));
}

TEST_CASE("ann model round-trips") {
  TrainConfig config;
  config.hidden_size = 4;
  config.epochs = 2;
  config.chi = 10.0;
  config.nu = 0.4;
  config.seed = 3;
  config.stop_tol = 0.0;
  const TrainedModel model = ann_svdd_fit(tiny_corpus(6, 1, 3, 17), config);
  REQUIRE(model.kind == ModelKind::Ann);

  TempPath tmp("ann");
  save_model(model, tmp.path);
  const TrainedModel loaded = load_model(tmp.path);
  CHECK(model_to_json(loaded) == model_to_json(model));
  CHECK(loaded.ann.w1.data == model.ann.w1.data);
  CHECK(loaded.ann.b1 == model.ann.b1);
}

TEST_CASE("record-space model round-trips") {
  TrainConfig config;
  config.epochs = 2;
  config.chi = 10.0;
  config.nu = 0.4;
  config.stop_tol = 0.0;
  const TrainedModel model = svdd_only_fit(tiny_corpus(6, 1, 3, 19), config);
  REQUIRE(model.kind == ModelKind::SvddOnly);

  TempPath tmp("svdd");
  save_model(model, tmp.path);
  const TrainedModel loaded = load_model(tmp.path);
  CHECK(model_to_json(loaded) == model_to_json(model));
  CHECK(loaded.sphere.center == model.sphere.center);
}

TEST_CASE("loader rejects malformed documents") {
  TempPath tmp("bad");

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_model("does_not_exist_1234.json"),
                         doctest::Contains("cannot open"), std::runtime_error);
  }
  SUBCASE("invalid json") {
    std::ofstream(tmp.path) << "{ not json";
    CHECK_THROWS_WITH_AS(load_model(tmp.path),
                         doctest::Contains("not valid JSON"),
                         std::runtime_error);
  }
  SUBCASE("wrong format version") {
    const TrainedModel model = tiny_lstm_model();
    std::string body = model_to_json(model);
    const std::string needle = "\"format_version\": 1";
    body.replace(body.find(needle), needle.size(), "\"format_version\": 99");
    std::ofstream(tmp.path) << body;
    CHECK_THROWS_WITH_AS(load_model(tmp.path),
                         doctest::Contains("format_version"),
                         std::runtime_error);
  }
  SUBCASE("missing field") {
    std::ofstream(tmp.path) << "{\"format_version\": 1}";
    CHECK_THROWS_AS(load_model(tmp.path), std::runtime_error);
  }
}

TEST_CASE("non-finite models refuse to serialize") {
  TrainedModel model = tiny_lstm_model();
  model.sphere.center[0] = std::nan("");
  CHECK_THROWS_AS(model_to_json(model), std::invalid_argument);
}
