#include "bgpbs/serialize.hpp"

#include <cmath>
#include <fstream>

#include "bgpbs/error.hpp"

namespace bgpbs {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class V>
ordered_json vector_to_json(const V& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    fail(ErrorKind::invalid_input, what + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorKind::invalid_input, what + ": row " + std::to_string(i) + " needs " +
                                         std::to_string(cols) + " columns");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  if (!m.allFinite()) fail(ErrorKind::invalid_input, what + ": non-finite entry");
  return m;
}

Vector vector_from_json(const json& j, Eigen::Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    fail(ErrorKind::invalid_input, what + ": expected " + std::to_string(n) + " entries");
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  if (!v.allFinite()) fail(ErrorKind::invalid_input, what + ": non-finite entry");
  return v;
}

constexpr const char* kGateNames[] = {"input", "forget", "output", "candidate"};

ordered_json cell_to_json(const LstmCellParams& c) {
  const auto h = c.hidden_dim();
  ordered_json in = ordered_json::object(), rec = ordered_json::object(), bias = ordered_json::object();
  for (int g = 0; g < 4; ++g) {
    const auto gate = static_cast<Gate>(g);
    in[kGateNames[g]] = matrix_to_json(LstmCellParams::gate_rows(c.input_weights, gate, h));
    rec[kGateNames[g]] = matrix_to_json(LstmCellParams::gate_rows(c.recurrent_weights, gate, h));
    bias[kGateNames[g]] = vector_to_json(LstmCellParams::gate_rows(c.bias, gate, h));
  }
  return {{"input_weights", in}, {"recurrent_weights", rec}, {"biases", bias}};
}

LstmCellParams cell_from_json(const json& j, std::size_t input_dim, std::size_t hidden,
                              const std::string& what) {
  auto c = LstmCellParams::zeros(input_dim, hidden);
  const auto H = static_cast<Eigen::Index>(hidden);
  const auto D = static_cast<Eigen::Index>(input_dim);
  for (int g = 0; g < 4; ++g) {
    const auto gate = static_cast<Gate>(g);
    const std::string name = kGateNames[g];
    LstmCellParams::gate_rows(c.input_weights, gate, hidden) =
        matrix_from_json(j.at("input_weights").at(name), H, D, what + ".input_weights." + name);
    LstmCellParams::gate_rows(c.recurrent_weights, gate, hidden) = matrix_from_json(
        j.at("recurrent_weights").at(name), H, H, what + ".recurrent_weights." + name);
    LstmCellParams::gate_rows(c.bias, gate, hidden) =
        vector_from_json(j.at("biases").at(name), H, what + ".biases." + name);
  }
  return c;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_input, std::string(what) + ": " + e.what());
  }
}

}  // namespace

ordered_json to_json(const Standardizer& s) {
  return {{"means", s.means}, {"stds", s.stds}, {"fitted_on", s.fitted_on}};
}

Standardizer standardizer_from_json(const json& j) {
  return guarded("standardizer", [&] {
    Standardizer s;
    s.means = j.at("means").get<std::vector<double>>();
    s.stds = j.at("stds").get<std::vector<double>>();
    s.fitted_on = j.at("fitted_on").get<std::size_t>();
    if (s.means.size() != s.stds.size() || s.means.empty())
      fail(ErrorKind::invalid_input, "standardizer means/stds length mismatch");
    for (std::size_t f = 0; f < s.stds.size(); ++f)
      if (!std::isfinite(s.means[f]) || !(s.stds[f] > 0.0) || !std::isfinite(s.stds[f]))
        fail(ErrorKind::invalid_input, "standardizer entries must be finite with positive stds");
    return s;
  });
}

ordered_json to_json(const AutoencoderParams& p, const TrainConfig& config) {
  ordered_json j;
  j["dims"] = {{"features", p.dims.features}, {"window", p.dims.window}, {"hidden", p.dims.hidden}};
  j["encoder"] = cell_to_json(p.encoder);
  j["decoder"] = cell_to_json(p.decoder);
  j["projection"] = {{"weights", matrix_to_json(p.projection)},
                     {"bias", vector_to_json(p.projection_bias)}};
  j["train_config"] = {{"hidden", config.hidden},
                       {"epochs", config.epochs},
                       {"batch_size", config.batch_size},
                       {"learning_rate", config.learning_rate},
                       {"beta1", config.beta1},
                       {"beta2", config.beta2},
                       {"epsilon", config.epsilon},
                       {"seed", config.seed}};
  return j;
}

AutoencoderParams autoencoder_from_json(const json& j, TrainConfig* config) {
  return guarded("autoencoder", [&] {
    AutoencoderParams p;
    const auto& d = j.at("dims");
    p.dims.features = d.at("features").get<std::size_t>();
    p.dims.window = d.at("window").get<std::size_t>();
    p.dims.hidden = d.at("hidden").get<std::size_t>();
    if (p.dims.features == 0 || p.dims.window == 0 || p.dims.hidden == 0)
      fail(ErrorKind::invalid_input, "autoencoder dims must be positive");
    p.encoder = cell_from_json(j.at("encoder"), p.dims.features, p.dims.hidden, "encoder");
    p.decoder = cell_from_json(j.at("decoder"), p.dims.hidden, p.dims.hidden, "decoder");
    const auto D = static_cast<Eigen::Index>(p.dims.features);
    const auto H = static_cast<Eigen::Index>(p.dims.hidden);
    p.projection = matrix_from_json(j.at("projection").at("weights"), D, H, "projection.weights");
    p.projection_bias = vector_from_json(j.at("projection").at("bias"), D, "projection.bias");
    p.validate();
    if (config != nullptr && j.contains("train_config")) {
      const auto& t = j.at("train_config");
      config->hidden = t.at("hidden").get<std::size_t>();
      config->epochs = t.at("epochs").get<std::size_t>();
      config->batch_size = t.at("batch_size").get<std::size_t>();
      config->learning_rate = t.at("learning_rate").get<double>();
      config->beta1 = t.at("beta1").get<double>();
      config->beta2 = t.at("beta2").get<double>();
      config->epsilon = t.at("epsilon").get<double>();
      config->seed = t.at("seed").get<std::uint64_t>();
    }
    return p;
  });
}

ordered_json to_json(const Threshold& t) {
  return {{"value", t.value}, {"percentile", t.percentile}, {"n_calibration", t.n_calibration}};
}

Threshold threshold_from_json(const json& j) {
  return guarded("threshold", [&] {
    Threshold t;
    t.value = j.at("value").get<double>();
    t.percentile = j.at("percentile").get<double>();
    t.n_calibration = j.at("n_calibration").get<std::size_t>();
    if (!std::isfinite(t.value) || !(t.percentile > 0.0 && t.percentile <= 100.0))
      fail(ErrorKind::invalid_input, "invalid threshold");
    return t;
  });
}

ordered_json detectors_to_json(const Threshold& t, const HeartbeatDetector& hb,
                               const CusumParams& cusum) {
  ordered_json j;
  j["threshold"] = to_json(t);
  j["heartbeat"] = {{"indices", hb.volume_features},
                    {"mu_v", hb.mean},
                    {"sigma_v", hb.stddev},
                    {"k", hb.k},
                    {"n", hb.persistence},
                    {"epsilon_floor", hb.epsilon_floor}};
  j["cusum"] = {{"k_c", cusum.slack}, {"h", cusum.decision}, {"reference", cusum.reference}};
  return j;
}

void detectors_from_json(const json& j, Threshold& t, HeartbeatDetector& hb, CusumParams& cusum) {
  guarded("detectors", [&] {
    t = threshold_from_json(j.at("threshold"));
    const auto& h = j.at("heartbeat");
    hb.volume_features = h.at("indices").get<std::vector<std::size_t>>();
    hb.mean = h.at("mu_v").get<double>();
    hb.stddev = h.at("sigma_v").get<double>();
    hb.k = h.at("k").get<double>();
    hb.persistence = h.at("n").get<std::size_t>();
    hb.epsilon_floor = h.value("epsilon_floor", 1.0);
    if (hb.volume_features.empty() || hb.persistence == 0 || !(hb.stddev >= 0.0))
      fail(ErrorKind::invalid_input, "invalid heartbeat detector");
    const auto& c = j.at("cusum");
    cusum.slack = c.at("k_c").get<double>();
    cusum.decision = c.at("h").get<double>();
    cusum.reference = c.value("reference", hb.mean);
    return 0;
  });
}

ordered_json to_json(const TrainReport& r) {
  return {{"epoch_loss", r.epoch_loss},
          {"validation",
           {{"count", r.validation.count},
            {"mean", r.validation.mean},
            {"median", r.validation.median},
            {"p99", r.validation.p99},
            {"max", r.validation.max}}}};
}

TrainReport train_report_from_json(const json& j) {
  return guarded("train report", [&] {
    TrainReport r;
    r.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    const auto& v = j.at("validation");
    r.validation.count = v.at("count").get<std::size_t>();
    r.validation.mean = v.at("mean").get<double>();
    r.validation.median = v.at("median").get<double>();
    r.validation.p99 = v.at("p99").get<double>();
    r.validation.max = v.at("max").get<double>();
    return r;
  });
}

ordered_json to_json(const ModelBundle& m) {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["schema"] = {{"feature_names", m.schema.feature_names},
                 {"bin_width_seconds", m.schema.bin_width_seconds}};
  j["window"] = m.window;
  j["stride"] = m.stride;
  j["standardizer"] = to_json(m.standardizer);
  j["autoencoder"] = to_json(m.autoencoder, m.train_config);
  j["training"] = to_json(m.train_report);
  j["detectors"] = detectors_to_json(m.threshold, m.heartbeat, m.cusum);
  return j;
}

ModelBundle model_bundle_from_json(const json& j) {
  return guarded("model", [&] {
    if (j.value("format_version", 0) != kModelFormatVersion)
      fail(ErrorKind::invalid_input, "unsupported model format version");
    ModelBundle m;
    m.schema.feature_names = j.at("schema").at("feature_names").get<std::vector<std::string>>();
    m.schema.bin_width_seconds = j.at("schema").value("bin_width_seconds", std::int64_t{60});
    m.schema.validate();
    m.window = j.at("window").get<std::size_t>();
    m.stride = j.at("stride").get<std::size_t>();
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    m.autoencoder = autoencoder_from_json(j.at("autoencoder"), &m.train_config);
    m.train_report = train_report_from_json(j.at("training"));
    detectors_from_json(j.at("detectors"), m.threshold, m.heartbeat, m.cusum);
    const auto d = m.schema.dimension();
    if (m.standardizer.dimension() != d || m.autoencoder.dims.features != d ||
        m.autoencoder.dims.window != m.window || m.stride == 0)
      fail(ErrorKind::invalid_input, "model components disagree on dimensions");
    for (auto f : m.heartbeat.volume_features)
      if (f >= d) fail(ErrorKind::invalid_input, "heartbeat feature index out of range");
    return m;
  });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
}

void write_json_file(const ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) fail(ErrorKind::io, "write failure on " + path.string());
}

void save_model(const ModelBundle& m, const std::filesystem::path& path) {
  write_json_file(to_json(m), path);
}

ModelBundle load_model(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return model_bundle_from_json(j);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace bgpbs
