#include "lstmsvdd/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lstmsvdd {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

std::string fmt_u64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  return buf;
}

std::string fmt_hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

void append_vector(std::string& out, const Vector& v) {
  out += '[';
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += fmt(v[k]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Matrix& m,
                   const std::string& indent) {
  out += "{\n" + indent + "  \"rows\": " + fmt(m.rows) +
         ",\n" + indent + "  \"cols\": " + fmt(m.cols) +
         ",\n" + indent + "  \"data\": ";
  append_vector(out, m.data);
  out += "\n" + indent + "}";
}

void append_gate(std::string& out, const GateParams& g,
                 const std::string& indent) {
  out += "{\n" + indent + "  \"w\": ";
  append_matrix(out, g.w, indent + "  ");
  out += ",\n" + indent + "  \"u\": ";
  append_matrix(out, g.u, indent + "  ");
  out += ",\n" + indent + "  \"b\": ";
  append_vector(out, g.b);
  out += "\n" + indent + "}";
}

void check_finite_model(const TrainedModel& model) {
  bool ok = all_finite(model.sphere.center) &&
            std::isfinite(model.sphere.radius);
  if (model.kind == ModelKind::Lstm) {
    const GateParams* gates[4] = {&model.lstm.block, &model.lstm.input_gate,
                                  &model.lstm.forget_gate,
                                  &model.lstm.output_gate};
    for (const GateParams* g : gates)
      ok = ok && all_finite(g->w) && all_finite(g->u) && all_finite(g->b);
  }
  if (model.kind == ModelKind::Ann)
    ok = ok && all_finite(model.ann.w1) && all_finite(model.ann.b1);
  if (!ok)
    throw std::invalid_argument("model contains non-finite values; refusing "
                                "to serialize");
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto& data = j.at("data");
  if (data.size() != m.data.size())
    throw std::runtime_error("matrix data length does not match its shape");
  for (std::size_t k = 0; k < m.data.size(); ++k)
    m.data[k] = data[k].get<double>();
  return m;
}

GateParams gate_from_json(const nlohmann::json& j) {
  GateParams g;
  g.w = matrix_from_json(j.at("w"));
  g.u = matrix_from_json(j.at("u"));
  g.b = j.at("b").get<Vector>();
  return g;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  check_finite_model(model);
  std::string out;
  out.reserve(1 << 16);
  out += "{\n";
  out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
  out += "  \"model_kind\": \"" + std::string(to_string(model.kind)) + "\",\n";
  out += "  \"pooling\": \"" + std::string(to_string(model.pooling)) + "\",\n";

  out += "  \"sphere\": {\n";
  out += "    \"radius\": " + fmt(model.sphere.radius) + ",\n";
  out += "    \"nu\": " + fmt(model.sphere.nu) + ",\n";
  out += "    \"chi\": " + fmt(model.sphere.chi) + ",\n";
  out += "    \"center\": ";
  append_vector(out, model.sphere.center);
  out += "\n  },\n";

  out += "  \"encoder\": {\n";
  out += "    \"input_dim\": " + fmt(model.encoder.input_dim) + ",\n";
  out += "    \"hash\": \"" + fmt_hex64(model.encoder.hash) + "\"\n";
  out += "  },\n";

  const TrainConfig& c = model.config;
  out += "  \"config\": {\n";
  out += "    \"learning_rate\": " + fmt(c.learning_rate) + ",\n";
  out += "    \"epochs\": " + fmt(c.epochs) + ",\n";
  out += "    \"chi\": " + fmt(c.chi) + ",\n";
  out += "    \"nu\": " + fmt(c.nu) + ",\n";
  out += "    \"pooling\": \"" + std::string(to_string(c.pooling)) + "\",\n";
  out += "    \"hidden_size\": " + fmt(c.hidden_size) + ",\n";
  out += "    \"lookback\": " + fmt(c.lookback) + ",\n";
  out += "    \"seed\": " + fmt_u64(c.seed) + ",\n";
  out += std::string("    \"batch_mode\": \"") +
         (c.batch_mode == BatchMode::Full ? "full" : "minibatch") + "\",\n";
  out += "    \"batch_size\": " + fmt(c.batch_size) + ",\n";
  out += "    \"stop_tol\": " + fmt(c.stop_tol) + "\n";
  out += "  },\n";

  out += "  \"training_log\": ";
  append_vector(out, model.training_log);

  if (model.kind == ModelKind::Lstm) {
    out += ",\n  \"lstm\": {\n";
    out += "    \"hidden_size\": " + fmt(model.lstm.hidden_size) + ",\n";
    out += "    \"input_size\": " + fmt(model.lstm.input_size) + ",\n";
    out += "    \"z\": ";
    append_gate(out, model.lstm.block, "    ");
    out += ",\n    \"i\": ";
    append_gate(out, model.lstm.input_gate, "    ");
    out += ",\n    \"f\": ";
    append_gate(out, model.lstm.forget_gate, "    ");
    out += ",\n    \"o\": ";
    append_gate(out, model.lstm.output_gate, "    ");
    out += "\n  }";
  } else if (model.kind == ModelKind::Ann) {
    out += ",\n  \"ann\": {\n";
    out += "    \"hidden_size\": " + fmt(model.ann.hidden_size) + ",\n";
    out += "    \"input_size\": " + fmt(model.ann.input_size) + ",\n";
    out += "    \"w1\": ";
    append_matrix(out, model.ann.w1, "    ");
    out += ",\n    \"b1\": ";
    append_vector(out, model.ann.b1);
    out += "\n  }";
  }

  out += "\n}\n";
  return out;
}

void save_model(const TrainedModel& model, const std::string& path) {
  const std::string body = model_to_json(model);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!file) throw std::runtime_error("failed writing " + path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open model file " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path + " is not valid JSON: " +
                             e.what());
  }

  try {
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw std::runtime_error("model file " + path + " has format_version " +
                               std::to_string(version) + "; expected " +
                               std::to_string(kFormatVersion));

    TrainedModel model;
    model.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    model.pooling = pooling_from_string(j.at("pooling").get<std::string>());

    const auto& sphere = j.at("sphere");
    model.sphere.radius = sphere.at("radius").get<double>();
    model.sphere.nu = sphere.at("nu").get<double>();
    model.sphere.chi = sphere.at("chi").get<double>();
    model.sphere.center = sphere.at("center").get<Vector>();

    const auto& enc = j.at("encoder");
    model.encoder.input_dim = enc.at("input_dim").get<std::size_t>();
    model.encoder.hash =
        std::stoull(enc.at("hash").get<std::string>(), nullptr, 16);

    const auto& cfg = j.at("config");
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.epochs = cfg.at("epochs").get<std::size_t>();
    model.config.chi = cfg.at("chi").get<double>();
    model.config.nu = cfg.at("nu").get<double>();
    model.config.pooling =
        pooling_from_string(cfg.at("pooling").get<std::string>());
    model.config.hidden_size = cfg.at("hidden_size").get<std::size_t>();
    model.config.lookback = cfg.at("lookback").get<std::size_t>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.batch_mode =
        cfg.at("batch_mode").get<std::string>() == "full" ? BatchMode::Full
                                                          : BatchMode::MiniBatch;
    model.config.batch_size = cfg.at("batch_size").get<std::size_t>();
    model.config.stop_tol = cfg.at("stop_tol").get<double>();

    model.training_log = j.at("training_log").get<std::vector<double>>();

    if (model.kind == ModelKind::Lstm) {
      const auto& lstm = j.at("lstm");
      model.lstm.hidden_size = lstm.at("hidden_size").get<std::size_t>();
      model.lstm.input_size = lstm.at("input_size").get<std::size_t>();
      model.lstm.block = gate_from_json(lstm.at("z"));
      model.lstm.input_gate = gate_from_json(lstm.at("i"));
      model.lstm.forget_gate = gate_from_json(lstm.at("f"));
      model.lstm.output_gate = gate_from_json(lstm.at("o"));
    } else if (model.kind == ModelKind::Ann) {
      const auto& ann = j.at("ann");
      model.ann.hidden_size = ann.at("hidden_size").get<std::size_t>();
      model.ann.input_size = ann.at("input_size").get<std::size_t>();
      model.ann.w1 = matrix_from_json(ann.at("w1"));
      model.ann.b1 = ann.at("b1").get<Vector>();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path +
                             " is missing or mistypes a field: " + e.what());
  }
}

}  // namespace lstmsvdd
