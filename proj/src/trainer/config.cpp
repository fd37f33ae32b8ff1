#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "unhaze/config.hpp"
#include "unhaze/errors.hpp"

namespace unhaze::trainer {
namespace {

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "' expects a real number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' expects on/off, got '" + v + "'");
}

std::string fmt_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<std::int64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("key '" + key + "' has an empty list element");
    out.push_back(parse_int(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError("key '" + key + "' expects a comma-separated integer list");
  return out;
}

struct Field {
  std::string key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define INT_FIELD(name, member)                                                                    \
  Field {                                                                                          \
    name, [](TrainConfig& c, const std::string& v) { c.member = parse_int(name, v); },             \
        [](const TrainConfig& c) { return std::to_string(c.member); }                              \
  }
#define REAL_FIELD(name, member)                                                                   \
  Field {                                                                                          \
    name, [](TrainConfig& c, const std::string& v) { c.member = parse_real(name, v); },            \
        [](const TrainConfig& c) { return fmt_real(c.member); }                                    \
  }
#define PATH_FIELD(name, member)                                                                   \
  Field {                                                                                          \
    name, [](TrainConfig& c, const std::string& v) { c.member = v; },                              \
        [](const TrainConfig& c) { return c.member.string(); }                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      INT_FIELD("epochs", epochs),
      INT_FIELD("decay_start", decay_start),
      INT_FIELD("steps_per_epoch", steps_per_epoch),
      INT_FIELD("batch_size", batch_size),
      REAL_FIELD("lr", lr),
      Field{"lr_negative",
            [](TrainConfig& c, const std::string& v) {
              if (v.empty() || v == "auto") {
                c.lr_negative.reset();
              } else {
                c.lr_negative = parse_real("lr_negative", v);
              }
            },
            [](const TrainConfig& c) { return c.lr_negative ? fmt_real(*c.lr_negative) : std::string("auto"); }},
      REAL_FIELD("beta1", beta1),
      REAL_FIELD("beta2", beta2),
      INT_FIELD("crop", crop),
      INT_FIELD("negatives", negatives),
      INT_FIELD("queries", queries),
      INT_FIELD("embed_dim", embed_dim),
      INT_FIELD("noise_dim", noise_dim),
      INT_FIELD("dc_radius", dc_radius),
      REAL_FIELD("tau", weights.tau),
      REAL_FIELD("lambda1", weights.lambda1),
      REAL_FIELD("lambda2", weights.lambda2),
      REAL_FIELD("lambda3", weights.lambda3),
      REAL_FIELD("lambda4", weights.lambda4),
      REAL_FIELD("lambda5", weights.lambda5),
      Field{"negative_source",
            [](TrainConfig& c, const std::string& v) {
              if (v == "adversarial") {
                c.negative_source = NegativeSource::Adversarial;
              } else if (v == "random_sampled") {
                c.negative_source = NegativeSource::RandomSampled;
              } else {
                throw ConfigError("key 'negative_source' expects adversarial|random_sampled, got '" + v + "'");
              }
            },
            [](const TrainConfig& c) { return to_string(c.negative_source); }},
      Field{"dual_cycle", [](TrainConfig& c, const std::string& v) { c.dual_cycle = parse_bool("dual_cycle", v); },
            [](const TrainConfig& c) { return std::string(c.dual_cycle ? "on" : "off"); }},
      INT_FIELD("base_width", generator.base_width),
      INT_FIELD("res_blocks", generator.res_blocks),
      INT_FIELD("downsample", generator.downsample),
      Field{"taps", [](TrainConfig& c, const std::string& v) { c.generator.taps = parse_int_list("taps", v); },
            [](const TrainConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.generator.taps.size(); ++i) {
                out += (i ? "," : "") + std::to_string(c.generator.taps[i]);
              }
              return out;
            }},
      INT_FIELD("disc_width", disc_width),
      INT_FIELD("disc_layers", disc_layers),
      Field{"seed",
            [](TrainConfig& c, const std::string& v) {
              const std::int64_t s = parse_int("seed", v);
              if (s < 0) throw ConfigError("key 'seed' must be >= 0");
              c.seed = static_cast<std::uint64_t>(s);
            },
            [](const TrainConfig& c) { return std::to_string(c.seed); }},
      Field{"precision",
            [](TrainConfig& c, const std::string& v) {
              if (v == "float32") {
                c.precision = torch::kFloat32;
              } else if (v == "float64") {
                c.precision = torch::kFloat64;
              } else {
                throw ConfigError("key 'precision' expects float32|float64, got '" + v + "'");
              }
            },
            [](const TrainConfig& c) { return std::string(c.precision == torch::kFloat64 ? "float64" : "float32"); }},
      Field{"threads", [](TrainConfig& c, const std::string& v) { c.threads = static_cast<int>(parse_int("threads", v)); },
            [](const TrainConfig& c) { return std::to_string(c.threads); }},
      INT_FIELD("checkpoint_every", checkpoint_every),
      PATH_FIELD("data.hazy_dir", hazy_dir),
      PATH_FIELD("data.clean_dir", clean_dir),
      PATH_FIELD("out_dir", out_dir),
  };
  return table;
}

#undef INT_FIELD
#undef REAL_FIELD
#undef PATH_FIELD

}  // namespace

std::string to_string(NegativeSource s) {
  return s == NegativeSource::Adversarial ? "adversarial" : "random_sampled";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> config_values(const TrainConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(decay_start >= 0 && decay_start <= epochs, "decay_start must lie in [0, epochs]");
  require(steps_per_epoch >= 0, "steps_per_epoch must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr > 0.0, "lr must be > 0");
  require(negative_lr() > 0.0, "lr_negative must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam betas must lie in [0,1)");
  require(crop >= 4, "crop must be >= 4");
  require(negatives >= 1, "negatives must be >= 1");
  require(queries >= 1, "queries must be >= 1");
  require(embed_dim >= 1 && noise_dim >= 1, "embed_dim and noise_dim must be >= 1");
  require(dc_radius >= 0, "dc_radius must be >= 0");
  require(disc_width >= 1 && disc_layers >= 1, "discriminator width and layers must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(checkpoint_every >= 0, "checkpoint_every must be >= 0");
  try {
    weights.validate();
    generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(crop % generator.stride() == 0,
          "crop must be divisible by the generator stride " + std::to_string(generator.stride()));
}

std::string spec_hash(const TrainConfig& cfg) {
  std::ostringstream os;
  os << cfg.generator.describe() << ";embed=" << cfg.embed_dim << ";noise=" << cfg.noise_dim
     << ";disc=" << cfg.disc_width << "x" << cfg.disc_layers;
  const std::string s = os.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace unhaze::trainer
