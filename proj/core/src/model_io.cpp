#include "dasa/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "binio.hpp"

namespace dasa {

namespace {

constexpr char kMagic[6] = {'D', 'A', 'S', 'A', '1', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindAutoencoder = 1;
constexpr std::uint8_t kKindModel = 2;

void write_header(std::ostream& out, std::uint8_t kind, const nlohmann::json& meta) {
  out.write(kMagic, sizeof(kMagic));
  binio::write_u32(out, kVersion);
  out.put(static_cast<char>(kind));
  const std::string header = meta.dump();
  binio::write_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

nlohmann::json read_header(std::istream& in, std::uint8_t want_kind,
                           const std::string& path) {
  char magic[sizeof(kMagic)];
  binio::read_exact(in, magic, sizeof(magic), "magic");
  if (std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(kMagic))) {
    throw std::runtime_error("'" + path + "' is not a DASA1 container");
  }
  const std::uint32_t version = binio::read_u32(in, "version");
  if (version != kVersion) {
    throw std::runtime_error("'" + path + "': unsupported container version " +
                             std::to_string(version));
  }
  const int kind = in.get();
  if (kind != want_kind) {
    throw std::runtime_error("'" + path + "': container kind " + std::to_string(kind) +
                             ", want " + std::to_string(want_kind));
  }
  const std::uint64_t len = binio::read_u64(in, "header length");
  std::string header(len, '\0');
  binio::read_exact(in, header.data(), len, "header");
  return nlohmann::json::parse(header);
}

void write_ae_payload(std::ostream& out, const AutoencoderParams& ae) {
  binio::write_f64_array(out, ae.w.values());
  binio::write_f64_array(out, ae.b);
  binio::write_f64_array(out, ae.w_dec.values());
  binio::write_f64_array(out, ae.b_dec);
}

AutoencoderParams read_ae_payload(std::istream& in, std::size_t input_dim,
                                  std::size_t hidden_dim) {
  AutoencoderParams ae;
  ae.w = Matrix(hidden_dim, input_dim);
  ae.w.values() = binio::read_f64_array(in, hidden_dim * input_dim, "encoder weights");
  ae.b = binio::read_f64_array(in, hidden_dim, "encoder bias");
  ae.w_dec = Matrix(input_dim, hidden_dim);
  ae.w_dec.values() =
      binio::read_f64_array(in, input_dim * hidden_dim, "decoder weights");
  ae.b_dec = binio::read_f64_array(in, input_dim, "decoder bias");
  ae.validate();
  return ae;
}

nlohmann::json meta_to_json(const ModelMeta& meta) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : meta) {
    j[k] = v;
  }
  return j;
}

void meta_from_json(const nlohmann::json& j, ModelMeta* meta) {
  if (meta == nullptr) {
    return;
  }
  meta->clear();
  for (const auto& [k, v] : j.items()) {
    (*meta)[k] = v.get<double>();
  }
}

}  // namespace

void save_model(const SaeDnnModel& m, const std::string& path, const ModelMeta& meta) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_model: cannot open '" + path + "'");
  }
  nlohmann::json header;
  header["input_dim"] = m.input_dim();
  header["hidden1"] = m.hidden1_dim();
  header["hidden2"] = m.hidden2_dim();
  header["n_classes"] = m.n_classes();
  header["mode"] = m.output_mode == OutputMode::softmax ? "softmax" : "sigmoid";
  header["meta"] = meta_to_json(meta);
  write_header(out, kKindModel, header);

  write_ae_payload(out, m.layer1);
  write_ae_payload(out, m.layer2);
  binio::write_f64_array(out, m.target_w.values());
  binio::write_f64_array(out, m.target_b);
  if (!out) {
    throw std::runtime_error("save_model: short write to '" + path + "'");
  }
}

SaeDnnModel load_model(const std::string& path, ModelMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_model: cannot open '" + path + "'");
  }
  const nlohmann::json header = read_header(in, kKindModel, path);
  const std::size_t input_dim = header.at("input_dim").get<std::size_t>();
  const std::size_t hidden1 = header.at("hidden1").get<std::size_t>();
  const std::size_t hidden2 = header.at("hidden2").get<std::size_t>();
  const std::size_t n_classes = header.at("n_classes").get<std::size_t>();
  const std::string mode = header.at("mode").get<std::string>();

  SaeDnnModel m;
  m.layer1 = read_ae_payload(in, input_dim, hidden1);
  m.layer2 = read_ae_payload(in, hidden1, hidden2);
  m.target_w = Matrix(n_classes, hidden2);
  m.target_w.values() =
      binio::read_f64_array(in, n_classes * hidden2, "target weights");
  m.target_b = binio::read_f64_array(in, n_classes, "target bias");
  m.output_mode = mode == "softmax" ? OutputMode::softmax : OutputMode::sigmoid_as_written;
  m.validate();
  meta_from_json(header.at("meta"), meta);
  return m;
}

void save_autoencoder(const AutoencoderParams& ae, const std::string& path,
                      const ModelMeta& meta) {
  ae.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_autoencoder: cannot open '" + path + "'");
  }
  nlohmann::json header;
  header["input_dim"] = ae.input_dim();
  header["hidden_dim"] = ae.hidden_dim();
  header["meta"] = meta_to_json(meta);
  write_header(out, kKindAutoencoder, header);
  write_ae_payload(out, ae);
  if (!out) {
    throw std::runtime_error("save_autoencoder: short write to '" + path + "'");
  }
}

AutoencoderParams load_autoencoder(const std::string& path, ModelMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_autoencoder: cannot open '" + path + "'");
  }
  const nlohmann::json header = read_header(in, kKindAutoencoder, path);
  const std::size_t input_dim = header.at("input_dim").get<std::size_t>();
  const std::size_t hidden_dim = header.at("hidden_dim").get<std::size_t>();
  AutoencoderParams ae = read_ae_payload(in, input_dim, hidden_dim);
  meta_from_json(header.at("meta"), meta);
  return ae;
}

}  // namespace dasa
