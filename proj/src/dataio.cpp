#include "unicon/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace unicon {
namespace {

using nlohmann::json;

constexpr char kEmbeddingMagic[4] = {'U', 'E', 'M', 'B'};
constexpr char kModelMagic[4] = {'U', 'M', 'D', 'L'};
constexpr std::uint16_t kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Little-endian primitives. Encoding is explicit so files are portable
// across hosts regardless of native byte order.

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(char((v >> shift) & 0xFF));
  }
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct ByteReader {
  const unsigned char* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;

  std::size_t remaining() const { return size - pos; }

  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) {
      throw std::runtime_error("truncated " + what + ": expected " +
                               std::to_string(n) + " bytes, found " +
                               std::to_string(remaining()));
    }
  }

  std::uint8_t u8(const std::string& what) {
    need(1, what);
    return data[pos++];
  }

  std::uint16_t u16(const std::string& what) {
    need(2, what);
    const std::uint16_t v =
        std::uint16_t(data[pos]) | std::uint16_t(data[pos + 1]) << 8;
    pos += 2;
    return v;
  }

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t(data[pos + k]) << (8 * k);
    pos += 4;
    return v;
  }

  float f32(const std::string& what) {
    return std::bit_cast<float>(u32(what));
  }

  std::string bytes(std::size_t n, const std::string& what) {
    need(n, what);
    std::string out(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return out;
  }
};

std::string slurp(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + what + ": " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& bytes,
           const std::string& what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + what + " for writing: " + path);
  }
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) {
    throw std::runtime_error("failed writing " + what + ": " + path);
  }
}

// ---------------------------------------------------------------------------
// Embedding blocks. On disk rows = samples and the payload is row-major, so
// one sample is contiguous; in memory samples are columns (dim x n), which
// makes the memory column-major order identical to the disk order.

void serialize_embeddings(std::string& out, const Matrix& data) {
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (!std::isfinite(data(i, j))) {
        throw std::invalid_argument(
            "embeddings must be finite; entry (" + std::to_string(i) + ", " +
            std::to_string(j) + ") is not");
      }
    }
  }
  out.append(kEmbeddingMagic, 4);
  put_u16(out, kFormatVersion);
  put_u32(out, std::uint32_t(data.cols()));  // samples
  put_u32(out, std::uint32_t(data.rows()));  // dimension
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      put_f32(out, float(data(i, j)));
    }
  }
}

Matrix deserialize_embeddings(ByteReader& reader) {
  const std::string magic = reader.bytes(4, "embedding header");
  if (std::string(kEmbeddingMagic, 4) != magic) {
    throw std::runtime_error(
        "bad magic at byte offset 0: expected \"UEMB\", found \"" + magic +
        "\"");
  }
  const std::uint16_t version = reader.u16("embedding header");
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported embedding file version " +
                             std::to_string(version) + " (reader supports " +
                             std::to_string(kFormatVersion) + ")");
  }
  const std::uint32_t samples = reader.u32("embedding header");
  const std::uint32_t dim = reader.u32("embedding header");
  const std::size_t expected = std::size_t(samples) * dim * 4;
  if (reader.remaining() < expected) {
    throw std::runtime_error(
        "truncated embedding payload: expected " + std::to_string(expected) +
        " bytes, found " + std::to_string(reader.remaining()));
  }
  Matrix data(dim, samples);
  std::size_t entry = 0;
  for (std::uint32_t j = 0; j < samples; ++j) {
    for (std::uint32_t i = 0; i < dim; ++i, ++entry) {
      const float v = reader.f32("embedding payload");
      if (!std::isfinite(v)) {
        throw std::runtime_error(
            "non-finite value at payload entry " + std::to_string(entry) +
            " (sample " + std::to_string(j) + ", dim " + std::to_string(i) +
            ")");
      }
      data(i, j) = double(v);
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// JSON helpers: strict key validation naming the offending (nested) key.

json parse_json_document(const std::string& text, const std::string& what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(what + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument(what + " must be a JSON object");
  }
  return j;
}

void reject_unknown_keys(const json& obj,
                         std::initializer_list<const char*> allowed,
                         const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known) {
      throw std::invalid_argument("unknown config key: " + prefix + it.key());
    }
  }
}

KernelSpec parse_kernel_spec(const json& node, const std::string& prefix) {
  KernelSpec spec;
  if (node.is_string()) {
    spec.kind = kernel_kind_from_string(node.get<std::string>());
    return spec;
  }
  if (!node.is_object()) {
    throw std::invalid_argument(prefix +
                                " must be a kernel name or an object");
  }
  reject_unknown_keys(node, {"kind", "bandwidth", "scale"}, prefix + ".");
  if (node.contains("kind")) {
    spec.kind = kernel_kind_from_string(node.at("kind").get<std::string>());
  }
  if (node.contains("bandwidth")) {
    spec.bandwidth = node.at("bandwidth").get<double>();
  }
  if (node.contains("scale")) spec.scale = node.at("scale").get<double>();
  return spec;
}

json kernel_spec_to_json(const KernelSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"bandwidth", spec.bandwidth},
              {"scale", spec.scale}};
}

RunConfig build_run_config(const json& j) {
  reject_unknown_keys(j,
                      {"loss", "kernel_x", "kernel_y", "rank", "rho",
                       "fixed_point", "spectral", "aggregation", "seed"},
                      "");
  RunConfig cfg;
  cfg.loss = loss_preset(cfg.loss_preset_name);

  if (j.contains("loss")) {
    const json& l = j.at("loss");
    if (l.is_string()) {
      cfg.loss_preset_name = l.get<std::string>();
      cfg.loss = loss_preset(cfg.loss_preset_name);
    } else if (l.is_object()) {
      reject_unknown_keys(l,
                          {"preset", "tau", "nu", "margin", "epsilon_diag",
                           "epsilon_offdiag", "bidirectional"},
                          "loss.");
      cfg.loss_preset_name = l.value("preset", std::string("clip"));
      cfg.loss = loss_preset(cfg.loss_preset_name);
      if (l.contains("tau")) cfg.loss.tau = l.at("tau").get<double>();
      if (l.contains("nu")) cfg.loss.nu = l.at("nu").get<double>();
      if (l.contains("margin")) cfg.loss.margin = l.at("margin").get<double>();
      if (l.contains("epsilon_diag")) {
        cfg.loss.epsilon_diag = l.at("epsilon_diag").get<double>();
      }
      if (l.contains("epsilon_offdiag")) {
        cfg.loss.epsilon_offdiag = l.at("epsilon_offdiag").get<double>();
      }
      if (l.contains("bidirectional")) {
        cfg.loss.bidirectional = l.at("bidirectional").get<bool>();
      }
    } else {
      throw std::invalid_argument("loss must be a preset name or an object");
    }
  }
  if (j.contains("rho")) {
    cfg.loss.rho = j.at("rho").get<double>();
    if (cfg.loss.rho <= 0.0) {
      throw std::invalid_argument("rho must be positive");
    }
  }
  if (j.contains("kernel_x")) {
    cfg.kernel_x = parse_kernel_spec(j.at("kernel_x"), "kernel_x");
  }
  if (j.contains("kernel_y")) {
    cfg.kernel_y = parse_kernel_spec(j.at("kernel_y"), "kernel_y");
  }
  if (j.contains("rank")) {
    cfg.rank = j.at("rank").get<int>();
    if (cfg.rank < 1) throw std::invalid_argument("rank must be positive");
  }
  if (j.contains("fixed_point")) {
    const json& fp = j.at("fixed_point");
    reject_unknown_keys(fp, {"max_iters", "rel_tol"}, "fixed_point.");
    if (fp.contains("max_iters")) {
      cfg.fixed_point.max_iters = fp.at("max_iters").get<int>();
    }
    if (fp.contains("rel_tol")) {
      cfg.fixed_point.rel_tol = fp.at("rel_tol").get<double>();
    }
  }
  if (j.contains("spectral")) {
    const json& sp = j.at("spectral");
    reject_unknown_keys(
        sp, {"tikhonov_lambda", "use_randomized", "oversampling", "power_iters"},
        "spectral.");
    if (sp.contains("tikhonov_lambda") && !sp.at("tikhonov_lambda").is_null()) {
      cfg.fixed_point.spectral.tikhonov_lambda =
          sp.at("tikhonov_lambda").get<double>();
    }
    if (sp.contains("use_randomized")) {
      cfg.fixed_point.spectral.use_randomized =
          sp.at("use_randomized").get<bool>();
    }
    if (sp.contains("oversampling")) {
      cfg.fixed_point.spectral.rsvd_oversampling =
          sp.at("oversampling").get<int>();
    }
    if (sp.contains("power_iters")) {
      cfg.fixed_point.spectral.rsvd_power_iters =
          sp.at("power_iters").get<int>();
    }
  }
  if (j.contains("aggregation")) {
    const json& ag = j.at("aggregation");
    reject_unknown_keys(ag, {"batch_size", "strategy", "scheme", "softmax_temp"},
                        "aggregation.");
    cfg.aggregation.enabled = true;
    if (ag.contains("batch_size")) {
      cfg.aggregation.batch_size = ag.at("batch_size").get<int>();
    }
    if (ag.contains("strategy")) {
      cfg.aggregation.strategy.kind =
          fusion_kind_from_string(ag.at("strategy").get<std::string>());
    }
    if (ag.contains("softmax_temp")) {
      cfg.aggregation.strategy.softmax_temp =
          ag.at("softmax_temp").get<double>();
    }
    if (ag.contains("scheme")) {
      cfg.aggregation.scheme =
          partition_scheme_from_string(ag.at("scheme").get<std::string>());
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  json echo;
  echo["loss"] = json{{"preset", cfg.loss_preset_name},
                      {"tau", cfg.loss.tau},
                      {"nu", cfg.loss.nu},
                      {"margin", cfg.loss.margin},
                      {"epsilon_diag", cfg.loss.epsilon_diag},
                      {"epsilon_offdiag", cfg.loss.epsilon_offdiag},
                      {"bidirectional", cfg.loss.bidirectional}};
  echo["rho"] = cfg.loss.rho;
  echo["kernel_x"] = kernel_spec_to_json(cfg.kernel_x);
  echo["kernel_y"] = kernel_spec_to_json(cfg.kernel_y);
  echo["rank"] = cfg.rank;
  echo["fixed_point"] = json{{"max_iters", cfg.fixed_point.max_iters},
                             {"rel_tol", cfg.fixed_point.rel_tol}};
  echo["spectral"] =
      json{{"tikhonov_lambda", cfg.fixed_point.spectral.tikhonov_lambda
                                   ? json(*cfg.fixed_point.spectral.tikhonov_lambda)
                                   : json(nullptr)},
           {"use_randomized", cfg.fixed_point.spectral.use_randomized},
           {"oversampling", cfg.fixed_point.spectral.rsvd_oversampling},
           {"power_iters", cfg.fixed_point.spectral.rsvd_power_iters}};
  if (cfg.aggregation.enabled) {
    echo["aggregation"] =
        json{{"batch_size", cfg.aggregation.batch_size},
             {"strategy", to_string(cfg.aggregation.strategy.kind)},
             {"softmax_temp", cfg.aggregation.strategy.softmax_temp},
             {"scheme", to_string(cfg.aggregation.scheme)}};
  }
  echo["seed"] = cfg.seed;
  cfg.resolved_json = echo.dump(2);
  return cfg;
}

// ---------------------------------------------------------------------------
// Model container pieces.

void serialize_json_trailer(std::string& out, const json& trailer) {
  const std::string text = trailer.dump();
  put_u32(out, std::uint32_t(text.size()));
  out += text;
}

json deserialize_json_trailer(ByteReader& reader) {
  const std::uint32_t len = reader.u32("model trailer");
  const std::string text = reader.bytes(len, "model trailer");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("corrupt model trailer: ") + e.what());
  }
}

enum : std::uint8_t { kKindLinear = 0, kKindKernel = 1, kKindEnsemble = 2 };

void serialize_model(std::string& out, const StoredModel& model);

void serialize_linear(std::string& out, const LinearModel& m) {
  serialize_embeddings(out, m.f1);
  serialize_embeddings(out, m.f2);
  serialize_json_trailer(out, json{{"rho", m.rho}});
}

void serialize_kernel(std::string& out, const KernelModel& m) {
  serialize_embeddings(out, m.a);
  serialize_embeddings(out, m.b);
  serialize_embeddings(out, m.ref_x);
  serialize_embeddings(out, m.ref_y);
  serialize_json_trailer(out,
                         json{{"rho", m.rho},
                              {"normalized_inputs", m.normalized_inputs},
                              {"kernel_x", kernel_spec_to_json(m.spec_x)},
                              {"kernel_y", kernel_spec_to_json(m.spec_y)}});
}

void serialize_ensemble(std::string& out, const BatchEnsemble& ens) {
  put_u32(out, std::uint32_t(ens.models.size()));
  for (const auto& model : ens.models) {
    std::string nested;
    std::visit([&nested](const auto& m) {
      serialize_model(nested, StoredModel(m));
    }, model);
    put_u32(out, std::uint32_t(nested.size()));
    out += nested;
  }
  serialize_json_trailer(
      out, json{{"weights", ens.weights},
                {"val_accuracies", ens.val_accuracies},
                {"degenerate_weights", ens.degenerate_weights},
                {"strategy", json{{"kind", to_string(ens.strategy.kind)},
                                  {"softmax_temp", ens.strategy.softmax_temp}}}});
}

StoredModel deserialize_model(ByteReader& reader);

KernelSpec kernel_spec_from_json(const json& node) {
  KernelSpec spec;
  spec.kind = kernel_kind_from_string(node.at("kind").get<std::string>());
  spec.bandwidth = node.at("bandwidth").get<double>();
  spec.scale = node.at("scale").get<double>();
  return spec;
}

StoredModel deserialize_model_body(ByteReader& reader, std::uint8_t kind) {
  switch (kind) {
    case kKindLinear: {
      LinearModel m;
      m.f1 = deserialize_embeddings(reader);
      m.f2 = deserialize_embeddings(reader);
      m.rho = deserialize_json_trailer(reader).at("rho").get<double>();
      return m;
    }
    case kKindKernel: {
      KernelModel m;
      m.a = deserialize_embeddings(reader);
      m.b = deserialize_embeddings(reader);
      m.ref_x = deserialize_embeddings(reader);
      m.ref_y = deserialize_embeddings(reader);
      const json trailer = deserialize_json_trailer(reader);
      m.rho = trailer.at("rho").get<double>();
      m.normalized_inputs = trailer.at("normalized_inputs").get<bool>();
      m.spec_x = kernel_spec_from_json(trailer.at("kernel_x"));
      m.spec_y = kernel_spec_from_json(trailer.at("kernel_y"));
      return m;
    }
    case kKindEnsemble: {
      BatchEnsemble ens;
      const std::uint32_t count = reader.u32("ensemble header");
      for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = reader.u32("ensemble member header");
        const std::string nested = reader.bytes(len, "ensemble member");
        ByteReader sub{reinterpret_cast<const unsigned char*>(nested.data()),
                       nested.size()};
        const StoredModel member = deserialize_model(sub);
        if (std::holds_alternative<LinearModel>(member)) {
          ens.models.emplace_back(std::get<LinearModel>(member));
        } else if (std::holds_alternative<KernelModel>(member)) {
          ens.models.emplace_back(std::get<KernelModel>(member));
        } else {
          throw std::runtime_error("ensembles cannot nest ensembles");
        }
      }
      const json trailer = deserialize_json_trailer(reader);
      ens.weights = trailer.at("weights").get<std::vector<double>>();
      ens.val_accuracies =
          trailer.at("val_accuracies").get<std::vector<double>>();
      ens.degenerate_weights = trailer.at("degenerate_weights").get<bool>();
      const json& strat = trailer.at("strategy");
      ens.strategy.kind =
          fusion_kind_from_string(strat.at("kind").get<std::string>());
      ens.strategy.softmax_temp = strat.at("softmax_temp").get<double>();
      return ens;
    }
    default:
      throw std::runtime_error("unknown model kind tag " +
                               std::to_string(int(kind)));
  }
}

void serialize_model(std::string& out, const StoredModel& model) {
  out.append(kModelMagic, 4);
  put_u16(out, kFormatVersion);
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          out.push_back(char(kKindLinear));
          serialize_linear(out, m);
        } else if constexpr (std::is_same_v<T, KernelModel>) {
          out.push_back(char(kKindKernel));
          serialize_kernel(out, m);
        } else {
          out.push_back(char(kKindEnsemble));
          serialize_ensemble(out, m);
        }
      },
      model);
}

StoredModel deserialize_model(ByteReader& reader) {
  const std::string magic = reader.bytes(4, "model header");
  if (std::string(kModelMagic, 4) != magic) {
    throw std::runtime_error(
        "bad magic at byte offset 0: expected \"UMDL\", found \"" + magic +
        "\"");
  }
  const std::uint16_t version = reader.u16("model header");
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported model file version " +
                             std::to_string(version) + " (reader supports " +
                             std::to_string(kFormatVersion) + ")");
  }
  const std::uint8_t kind = reader.u8("model header");
  return deserialize_model_body(reader, kind);
}

// Trims ASCII whitespace from both ends.
std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

long parse_index_field(const std::string& field, int line_no,
                       const std::string& path) {
  long value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0) {
    throw std::invalid_argument("malformed pair on line " +
                                std::to_string(line_no) + " of " + path +
                                ": \"" + field + "\" is not an index");
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix read_embeddings(const std::string& path) {
  const std::string bytes = slurp(path, "embedding file");
  ByteReader reader{reinterpret_cast<const unsigned char*>(bytes.data()),
                    bytes.size()};
  return deserialize_embeddings(reader);
}

void write_embeddings(const std::string& path, const Matrix& data) {
  std::string out;
  serialize_embeddings(out, data);
  spill(path, out, "embedding file");
}

Mask read_pair_mask(const std::string& path, Eigen::Index n_x,
                    Eigen::Index n_y) {
  std::ifstream in(path);
  if (!in) {
    if (n_x == n_y) return identity_mask(n_x);
    throw std::invalid_argument(
        "pair mask file missing and views differ in size (" +
        std::to_string(n_x) + " vs " + std::to_string(n_y) +
        "): cannot assume identity pairing");
  }
  Mask mask = Mask::Constant(n_x, n_y, false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // "i,j" header
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("malformed pair on line " +
                                  std::to_string(line_no) + " of " + path +
                                  ": expected \"i,j\"");
    }
    const long i = parse_index_field(trim(body.substr(0, comma)), line_no, path);
    const long j = parse_index_field(trim(body.substr(comma + 1)), line_no, path);
    if (i >= n_x || j >= n_y) {
      throw std::invalid_argument(
          "pair index out of range on line " + std::to_string(line_no) +
          ": (" + std::to_string(i) + ", " + std::to_string(j) + ") with " +
          std::to_string(n_x) + " x " + std::to_string(n_y) + " mask");
    }
    mask(i, j) = true;
  }
  validate_mask(mask);
  return mask;
}

void write_pair_mask(const std::string& path, const Mask& mask) {
  std::ostringstream out;
  out << "i,j\n";
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      if (mask(i, j)) out << i << ',' << j << '\n';
    }
  }
  spill(path, out.str(), "pair mask file");
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open label file: " + path);
  }
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // "label" header
    const std::string body = trim(line);
    if (body.empty()) continue;
    labels.push_back(int(parse_index_field(body, line_no, path)));
  }
  return labels;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ostringstream out;
  out << "label\n";
  for (const int label : labels) out << label << '\n';
  spill(path, out.str(), "label file");
}

void save_model(const std::string& path, const StoredModel& model) {
  std::string out;
  serialize_model(out, model);
  spill(path, out, "model file");
}

StoredModel load_model(const std::string& path) {
  const std::string bytes = slurp(path, "model file");
  ByteReader reader{reinterpret_cast<const unsigned char*>(bytes.data()),
                    bytes.size()};
  return deserialize_model(reader);
}

RunConfig parse_run_config(const std::string& json_text) {
  const json j = parse_json_document(json_text, "run config");
  try {
    return build_run_config(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("run config: ") + e.what());
  }
}

RunConfig read_run_config(const std::string& path) {
  return parse_run_config(slurp(path, "run config file"));
}

SynthConfig parse_synth_config(const std::string& json_text) {
  const json j = parse_json_document(json_text, "synth config");
  try {
    reject_unknown_keys(j,
                        {"n", "d1", "d2", "r_latent", "k_clusters", "snr",
                         "nonlinearity", "seed", "split", "center_scale",
                         "within_cluster_std"},
                        "");
    SynthConfig cfg;
    if (j.contains("n")) cfg.n = j.at("n").get<int>();
    if (j.contains("d1")) cfg.d1 = j.at("d1").get<int>();
    if (j.contains("d2")) cfg.d2 = j.at("d2").get<int>();
    if (j.contains("r_latent")) cfg.r_latent = j.at("r_latent").get<int>();
    if (j.contains("k_clusters")) {
      cfg.k_clusters = j.at("k_clusters").get<int>();
    }
    if (j.contains("snr")) cfg.snr = j.at("snr").get<double>();
    if (j.contains("nonlinearity")) {
      const std::string name = j.at("nonlinearity").get<std::string>();
      if (name == "none") {
        cfg.nonlinearity = Nonlinearity::kNone;
      } else if (name == "tanh") {
        cfg.nonlinearity = Nonlinearity::kTanh;
      } else {
        throw std::invalid_argument("unknown nonlinearity: " + name +
                                    " (expected \"none\" or \"tanh\")");
      }
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("split")) {
      const json& split = j.at("split");
      if (!split.is_array() || split.size() != 3) {
        throw std::invalid_argument(
            "split must be an array of 3 fractions [train, val, test]");
      }
      for (int k = 0; k < 3; ++k) cfg.split[k] = split.at(k).get<double>();
    }
    if (j.contains("center_scale")) {
      cfg.center_scale = j.at("center_scale").get<double>();
    }
    if (j.contains("within_cluster_std")) {
      cfg.within_cluster_std = j.at("within_cluster_std").get<double>();
    }
    return cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("synth config: ") + e.what());
  }
}

SynthConfig read_synth_config(const std::string& path) {
  return parse_synth_config(slurp(path, "synth config file"));
}

std::string report_to_json(const EvalReport& report,
                           const std::string& resolved_config_json) {
  json j;
  j["matching_accuracy_i2t"] = report.accuracy.x_to_y;
  j["matching_accuracy_t2i"] = report.accuracy.y_to_x;
  j["matching_accuracy_avg"] = report.accuracy.avg;
  for (const auto& [k, v] : report.recall.x_to_y) {
    j["r_at_" + std::to_string(k) + "_i2t"] = v;
  }
  for (const auto& [k, v] : report.recall.y_to_x) {
    j["r_at_" + std::to_string(k) + "_t2i"] = v;
  }
  j["wall_time_seconds"] = report.wall_time_seconds;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  if (!resolved_config_json.empty()) {
    j["config"] = json::parse(resolved_config_json);
  }
  return j.dump(2);
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream header;
  std::ostringstream row;
  const auto emit = [&](const std::string& name, const auto& value,
                        bool first = false) {
    if (!first) {
      header << ',';
      row << ',';
    }
    header << name;
    row << value;
  };
  emit("matching_accuracy_i2t", report.accuracy.x_to_y, true);
  emit("matching_accuracy_t2i", report.accuracy.y_to_x);
  emit("matching_accuracy_avg", report.accuracy.avg);
  for (const auto& [k, v] : report.recall.x_to_y) {
    emit("r_at_" + std::to_string(k) + "_i2t", v);
  }
  for (const auto& [k, v] : report.recall.y_to_x) {
    emit("r_at_" + std::to_string(k) + "_t2i", v);
  }
  emit("wall_time_seconds", report.wall_time_seconds);
  emit("iterations", report.iterations);
  emit("converged", report.converged ? 1 : 0);
  return header.str() + "\n" + row.str() + "\n";
}

}  // namespace unicon
