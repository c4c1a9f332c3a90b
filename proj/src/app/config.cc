#include "gwrl/app/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace gwrl::app {
namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<bool(const std::string&)> set;  // false on a malformed value
};

template <typename T>
bool ParseNumber(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
Field Integer(std::string section, std::string key, T& ref) {
  return {std::move(section), std::move(key), [&ref] { return std::to_string(ref); },
          [&ref](const std::string& s) { return ParseNumber(s, ref); }};
}

Field Real(std::string section, std::string key, double& ref) {
  return {std::move(section), std::move(key), [&ref] { return FormatDouble(ref); },
          [&ref](const std::string& s) { return ParseNumber(s, ref); }};
}

Field Flag(std::string section, std::string key, bool& ref) {
  return {std::move(section), std::move(key), [&ref] { return std::string(ref ? "true" : "false"); },
          [&ref](const std::string& s) {
            if (s == "true" || s == "1") {
              ref = true;
            } else if (s == "false" || s == "0") {
              ref = false;
            } else {
              return false;
            }
            return true;
          }};
}

std::vector<Field> Fields(Config& c) {
  return {
      Integer("scene", "num_scenes", c.num_scenes),
      Integer("scene", "seed", c.data_seed),
      Integer("scene", "num_categories", c.scene.num_categories),
      Integer("scene", "min_objects", c.scene.min_objects),
      Integer("scene", "max_objects", c.scene.max_objects),
      Integer("scene", "width", c.scene.width),
      Integer("scene", "height", c.scene.height),
      Integer("scene", "feature_dim", c.scene.feature_dim),
      Real("scene", "min_side_fraction", c.scene.min_side_fraction),
      Integer("model", "word_dim", c.model.word_dim),
      Integer("model", "category_dim", c.model.category_dim),
      Integer("model", "hidden", c.model.hidden),
      Integer("model", "mlp_hidden", c.model.mlp_hidden),
      Integer("model", "baseline_hidden", c.model.baseline_hidden),
      Integer("model", "seed", c.model_seed),
      Real("supervised", "lr", c.supervised.lr),
      Integer("supervised", "batch_size", c.supervised.batch_size),
      Integer("supervised", "epochs", c.supervised.epochs),
      Flag("supervised", "halve_on_plateau", c.supervised.halve_on_plateau),
      Real("supervised", "clip_norm", c.supervised.clip_norm),
      Integer("supervised", "seed", c.supervised.seed),
      Real("rl", "lr_policy", c.rl.lr_policy),
      Real("rl", "lr_baseline", c.rl.lr_baseline),
      Integer("rl", "batch_size", c.rl.batch_size),
      Integer("rl", "epochs", c.rl.epochs),
      Real("rl", "gamma", c.rl.gamma),
      Integer("rl", "max_questions", c.rl.max_questions),
      Integer("rl", "max_words", c.rl.max_words),
      Integer("rl", "seed", c.rl.seed),
      Integer("eval", "runs", c.eval.runs),
      {"eval", "decoder", [&c] { return decode::DecoderName(c.eval.decoder); },
       [&c](const std::string& s) {
         try {
           c.eval.decoder = decode::ParseDecoder(s);
           return true;
         } catch (const std::invalid_argument&) {
           return false;
         }
       }},
      Integer("eval", "beam_width", c.eval.beam_width),
      Flag("eval", "length_normalize", c.eval.length_normalize),
      Integer("eval", "seed", c.eval.seed),
  };
}

std::vector<std::string> Assign(Config& config, const std::string& section,
                                const std::string& key, const std::string& value) {
  for (auto& f : Fields(config)) {
    if (f.section != section || f.key != key) continue;
    if (!f.set(value)) return {section + "." + key + ": cannot parse '" + value + "'"};
    return {};
  }
  return {"unknown key " + section + "." + key};
}

}  // namespace

void Config::SetWorkers(int workers) {
  supervised.workers = workers;
  rl.workers = workers;
}

std::vector<std::string> Config::Validate() const {
  std::vector<std::string> errors = scene.Validate();
  if (num_scenes < 10) errors.push_back("scene.num_scenes must be >= 10");
  for (const auto& e : model.Validate()) errors.push_back("model." + e);
  for (const auto& e : supervised.Validate("supervised")) errors.push_back(e);
  for (const auto& e : rl.Validate("rl")) errors.push_back(e);
  if (eval.runs < 1) errors.push_back("eval.runs must be >= 1");
  if (eval.beam_width < 1) errors.push_back("eval.beam_width must be >= 1");
  return errors;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : " ") + problems[i];
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> ApplyIni(const std::string& text, Config& config) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    return {"line " + std::to_string(e.line()) + ": " + e.message()};
  }
  std::vector<std::string> errors;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      errors.push_back("key " + section + " is outside a section");
      continue;
    }
    for (const auto& [key, value] : body) {
      for (auto& e : Assign(config, section, key, value.data())) errors.push_back(std::move(e));
    }
  }
  return errors;
}

std::vector<std::string> ApplyOverride(const std::string& assignment, Config& config) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    return {"override '" + assignment + "' is not section.key=value"};
  }
  return Assign(config, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
                assignment.substr(eq + 1));
}

Config LoadConfig(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  Config config;
  std::vector<std::string> errors;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read " + path.string()});
    std::stringstream text;
    text << in.rdbuf();
    errors = ApplyIni(text.str(), config);
  }
  for (const auto& o : overrides) {
    for (auto& e : ApplyOverride(o, config)) errors.push_back(std::move(e));
  }
  for (auto& e : config.Validate()) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

std::string ToIni(const Config& config) {
  Config copy = config;
  std::ostringstream out;
  std::string section;
  for (const auto& f : Fields(copy)) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

}  // namespace gwrl::app
