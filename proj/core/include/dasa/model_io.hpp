#pragma once

#include <map>
#include <string>

#include "dasa/autoencoder.hpp"
#include "dasa/sae_dnn.hpp"

namespace dasa {

// DASA1 container: magic, version, a JSON header carrying dims / mode /
// numeric metadata (seed, hyperparameters), then all weight matrices as
// row-major little-endian 64-bit floats.
using ModelMeta = std::map<std::string, double>;

void save_model(const SaeDnnModel& m, const std::string& path,
                const ModelMeta& meta = {});
SaeDnnModel load_model(const std::string& path, ModelMeta* meta = nullptr);

void save_autoencoder(const AutoencoderParams& ae, const std::string& path,
                      const ModelMeta& meta = {});
AutoencoderParams load_autoencoder(const std::string& path, ModelMeta* meta = nullptr);

}  // namespace dasa
