#include "dasa/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dasa {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) {
    ++lo;
  }
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) {
    --hi;
  }
  return s.substr(lo, hi - lo);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) {
      throw std::invalid_argument("");
    }
    return x;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': cannot parse '" + v + "' as a number");
  }
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size() || x < 0) {
      throw std::invalid_argument("");
    }
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': cannot parse '" + v +
                     "' as a non-negative integer");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) {
      throw std::invalid_argument("");
    }
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': cannot parse '" + v +
                     "' as an unsigned integer");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Registry = std::map<std::string, Field>;

Field string_field(std::string RunConfig::* member) {
  return {[member](RunConfig& c, const std::string& v, const std::string&) {
            c.*member = v;
          },
          [member](const RunConfig& c) { return c.*member; }};
}

Field enum_field(std::string RunConfig::* member, std::vector<std::string> allowed) {
  return {[member, allowed = std::move(allowed)](RunConfig& c, const std::string& v,
                                                 const std::string& key) {
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
              std::string opts;
              for (const std::string& a : allowed) {
                opts += (opts.empty() ? "" : ", ") + a;
              }
              throw UsageError("config key '" + key + "': value '" + v +
                               "' not one of: " + opts);
            }
            c.*member = v;
          },
          [member](const RunConfig& c) { return c.*member; }};
}

Field double_field(double RunConfig::* member) {
  return {[member](RunConfig& c, const std::string& v, const std::string& key) {
            c.*member = parse_double(v, key);
          },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field size_field(std::size_t RunConfig::* member) {
  return {[member](RunConfig& c, const std::string& v, const std::string& key) {
            c.*member = parse_size(v, key);
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field u64_field(std::uint64_t RunConfig::* member) {
  return {[member](RunConfig& c, const std::string& v, const std::string& key) {
            c.*member = parse_u64(v, key);
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

const Registry& registry() {
  static const Registry reg = {
      {"source_dir", string_field(&RunConfig::source_dir)},
      {"target_dir", string_field(&RunConfig::target_dir)},
      {"out_dir", string_field(&RunConfig::out_dir)},
      {"model_in", string_field(&RunConfig::model_in)},
      {"image", string_field(&RunConfig::image)},
      {"fov", string_field(&RunConfig::fov)},
      {"patch_side", size_field(&RunConfig::patch_side)},
      {"fraction", double_field(&RunConfig::fraction)},
      {"fraction_unlabeled", double_field(&RunConfig::fraction_unlabeled)},
      {"fraction_labeled", double_field(&RunConfig::fraction_labeled)},
      {"source_train_images", size_field(&RunConfig::source_train_images)},
      {"source_test_images", size_field(&RunConfig::source_test_images)},
      {"target_unlabeled_images", size_field(&RunConfig::target_unlabeled_images)},
      {"target_labeled_images", size_field(&RunConfig::target_labeled_images)},
      {"target_test_images", size_field(&RunConfig::target_test_images)},
      {"hidden1", size_field(&RunConfig::hidden1)},
      {"hidden2", size_field(&RunConfig::hidden2)},
      {"output_mode", enum_field(&RunConfig::output_mode, {"softmax", "sigmoid"})},
      {"loss", enum_field(&RunConfig::loss, {"squared_error", "cross_entropy"})},
      {"pretrain_lr", double_field(&RunConfig::pretrain_lr)},
      {"pretrain_epochs", size_field(&RunConfig::pretrain_epochs)},
      {"beta", double_field(&RunConfig::beta)},
      {"rho", double_field(&RunConfig::rho)},
      {"batch_size", size_field(&RunConfig::batch_size)},
      {"finetune_lr", double_field(&RunConfig::finetune_lr)},
      {"finetune_epochs", size_field(&RunConfig::finetune_epochs)},
      {"tau", double_field(&RunConfig::tau)},
      {"adapt_lr", double_field(&RunConfig::adapt_lr)},
      {"adapt_epochs", size_field(&RunConfig::adapt_epochs)},
      {"adapt_statistic",
       enum_field(&RunConfig::adapt_statistic, {"batch_mean", "per_sample"})},
      {"adapt_beta", double_field(&RunConfig::adapt_beta)},
      {"adapt_rho", double_field(&RunConfig::adapt_rho)},
      {"arms", string_field(&RunConfig::arms)},
      {"tau_grid", string_field(&RunConfig::tau_grid)},
      {"seeds", string_field(&RunConfig::seeds)},
      {"seed", u64_field(&RunConfig::seed)},
      {"synth_source_images", size_field(&RunConfig::synth_source_images)},
      {"synth_target_images", size_field(&RunConfig::synth_target_images)},
      {"image_width", size_field(&RunConfig::image_width)},
      {"image_height", size_field(&RunConfig::image_height)},
      {"shift_gain", string_field(&RunConfig::shift_gain)},
      {"shift_bias", string_field(&RunConfig::shift_bias)},
      {"shift_noise", double_field(&RunConfig::shift_noise)},
  };
  return reg;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = registry().find(key);
  if (it == registry().end()) {
    throw UsageError("unknown config key '" + key + "'");
  }
  it->second.set(*this, value, key);
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = registry().find(key);
  if (it == registry().end()) {
    throw UsageError("unknown config key '" + key + "'");
  }
  return it->second.get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) {
      v.push_back(k);
    }
    return v;  // std::map iteration is already sorted
  }();
  return names;
}

std::string RunConfig::manifest_text() const {
  std::ostringstream out;
  out << "version = " << kToolVersion << "\n";
  for (const std::string& key : keys()) {
    out << key << " = " << get(key) << "\n";
  }
  return out.str();
}

RunConfig load_run_config(const std::optional<std::string>& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (config_path.has_value()) {
    std::ifstream in(*config_path);
    if (!in) {
      throw UsageError("cannot open config file '" + *config_path + "'");
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') {
        continue;
      }
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw UsageError("config file '" + *config_path + "' line " +
                         std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      try {
        cfg.set(key, value);
      } catch (const UsageError& e) {
        throw UsageError("config file '" + *config_path + "' line " +
                         std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  for (const auto& [key, value] : overrides) {
    cfg.set(key, value);
  }
  return cfg;
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) {
      continue;
    }
    out.push_back(parse_double(t, what));
  }
  if (out.empty()) {
    throw UsageError(what + ": empty list '" + csv + "'");
  }
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& csv, const std::string& what) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) {
      continue;
    }
    out.push_back(parse_u64(t, what));
  }
  if (out.empty()) {
    throw UsageError(what + ": empty list '" + csv + "'");
  }
  return out;
}

}  // namespace dasa
