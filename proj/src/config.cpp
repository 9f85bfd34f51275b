#include "genesift/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "genesift/errors.hpp"
#include "genesift/text.hpp"

namespace genesift {

namespace {

struct Entry {
  std::string key;
  std::function<void(ResolvedConfig&, const std::string&)> set;
  std::function<std::string(const ResolvedConfig&)> get;
};

double need_double(const std::string& key, const std::string& value) {
  auto v = parse_double(value);
  if (!v) throw Error(ErrorKind::Config, key + ": '" + value + "' is not a number");
  return *v;
}

long long need_int(const std::string& key, const std::string& value) {
  auto v = parse_int(value);
  if (!v) throw Error(ErrorKind::Config, key + ": '" + value + "' is not an integer");
  return *v;
}

std::size_t need_size(const std::string& key, const std::string& value, std::size_t lo = 0) {
  const long long v = need_int(key, value);
  if (v < static_cast<long long>(lo))
    throw Error(ErrorKind::Config, key + ": must be at least " + std::to_string(lo));
  return static_cast<std::size_t>(v);
}

Entry fixed_entry(std::string key, std::string value) {
  return Entry{
      key,
      [key, value](ResolvedConfig&, const std::string& given) {
        if (trim(given) != value)
          throw Error(ErrorKind::Config, key + ": only '" + value + "' is supported");
      },
      [value](const ResolvedConfig&) { return value; },
  };
}

template <typename Section>
Entry double_entry(std::string key, Section PipelineConfig::* section, double Section::* field) {
  return Entry{
      key,
      [key, section, field](ResolvedConfig& cfg, const std::string& v) {
        cfg.pipeline.*section.*field = need_double(key, v);
      },
      [section, field](const ResolvedConfig& cfg) { return fmt_double(cfg.pipeline.*section.*field); },
  };
}

std::vector<Entry> build_registry() {
  std::vector<Entry> reg;
  auto add = [&](Entry e) { reg.push_back(std::move(e)); };

  // data
  add({"data.nan_replacement",
       [](ResolvedConfig& cfg, const std::string& v) {
         if (trim(v) == "reject") {
           cfg.nan_replacement.reset();
         } else {
           cfg.nan_replacement = need_double("data.nan_replacement", v);
         }
       },
       [](const ResolvedConfig& cfg) {
         return cfg.nan_replacement ? fmt_double(*cfg.nan_replacement) : std::string("reject");
       }});

  // firefly
  add({"firefly.population",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.firefly.population = need_size("firefly.population", v, 2); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.firefly.population); }});
  add({"firefly.iterations",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.firefly.iterations = need_size("firefly.iterations", v); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.firefly.iterations); }});
  add(double_entry("firefly.gamma_absorption", &PipelineConfig::firefly, &FireflyParams::gamma_absorption));
  add(double_entry("firefly.beta_min", &PipelineConfig::firefly, &FireflyParams::beta_min));
  add(double_entry("firefly.beta_zero", &PipelineConfig::firefly, &FireflyParams::beta_zero));
  add(double_entry("firefly.alpha_step", &PipelineConfig::firefly, &FireflyParams::alpha_step));
  add(double_entry("firefly.chaotic_coefficient", &PipelineConfig::firefly, &FireflyParams::chaotic_coefficient));
  add(fixed_entry("firefly.chaotic_map", "logistic"));
  add(fixed_entry("firefly.chaotic_parameter", "normal"));
  add(fixed_entry("firefly.chaotic_population", "normal"));
  add(fixed_entry("firefly.accelerator", "normal"));
  add(fixed_entry("firefly.mutation_type", "bit_flip"));
  add(double_entry("firefly.mutation_prob", &PipelineConfig::firefly, &FireflyParams::mutation_prob));
  add({"firefly.report_frequency",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.firefly.report_frequency = need_size("firefly.report_frequency", v, 1); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.firefly.report_frequency); }});
  add({"firefly.seed",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.firefly.seed = static_cast<std::uint64_t>(need_int("firefly.seed", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.firefly.seed); }});

  // elephant
  add({"elephant.population",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.population = need_size("elephant.population", v, 2); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.population); }});
  add({"elephant.iterations",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.iterations = need_size("elephant.iterations", v); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.iterations); }});
  add({"elephant.n_clans",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.n_clans = need_size("elephant.n_clans", v, 1); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.n_clans); }});
  add(double_entry("elephant.male_fraction", &PipelineConfig::elephant, &ElephantParams::male_fraction));
  auto radius_entry = [](std::string key, double ElephantParams::* field) {
    return Entry{
        key,
        [key, field](ResolvedConfig& c, const std::string& v) {
          c.pipeline.elephant.*field = trim(v) == "auto" ? 0.0 : need_double(key, v);
        },
        [field](const ResolvedConfig& c) {
          const double v = c.pipeline.elephant.*field;
          return v > 0.0 ? fmt_double(v) : std::string("auto");
        },
    };
  };
  add(radius_entry("elephant.female_visual_radius", &ElephantParams::female_visual_radius));
  add(radius_entry("elephant.male_visual_radius", &ElephantParams::male_visual_radius));
  add({"elephant.max_age",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.max_age = static_cast<int>(need_size("elephant.max_age", v, 1)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.max_age); }});
  add(double_entry("elephant.chaotic_coefficient", &PipelineConfig::elephant, &ElephantParams::chaotic_coefficient));
  add(fixed_entry("elephant.chaotic_map", "logistic"));
  add(fixed_entry("elephant.chaotic_parameter", "normal"));
  add(fixed_entry("elephant.chaotic_population", "normal"));
  add(fixed_entry("elephant.accelerator", "normal"));
  add(fixed_entry("elephant.mutation_type", "bit_flip"));
  add(double_entry("elephant.mutation_prob", &PipelineConfig::elephant, &ElephantParams::mutation_prob));
  add({"elephant.report_frequency",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.report_frequency = need_size("elephant.report_frequency", v, 1); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.report_frequency); }});
  add({"elephant.seed",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.elephant.seed = static_cast<std::uint64_t>(need_int("elephant.seed", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.elephant.seed); }});

  // objective
  add({"objective.kind",
       [](ResolvedConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "merit")
           c.pipeline.objective.kind = ObjectiveKind::Merit;
         else if (t == "wrapper")
           c.pipeline.objective.kind = ObjectiveKind::Wrapper;
         else if (t == "multi_objective")
           c.pipeline.objective.kind = ObjectiveKind::MultiObjective;
         else
           throw Error(ErrorKind::Config, "objective.kind: expected merit|wrapper|multi_objective");
       },
       [](const ResolvedConfig& c) {
         switch (c.pipeline.objective.kind) {
           case ObjectiveKind::Merit: return std::string("merit");
           case ObjectiveKind::Wrapper: return std::string("wrapper");
           default: return std::string("multi_objective");
         }
       }});
  add({"objective.w_quality",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.objective.w_quality = need_double("objective.w_quality", v); },
       [](const ResolvedConfig& c) { return fmt_double(c.pipeline.objective.w_quality); }});
  add({"objective.w_parsimony",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.objective.w_parsimony = need_double("objective.w_parsimony", v); },
       [](const ResolvedConfig& c) { return fmt_double(c.pipeline.objective.w_parsimony); }});
  add({"objective.folds",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.objective.folds = need_size("objective.folds", v, 2); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.objective.folds); }});
  add({"objective.seed",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.objective.seed = static_cast<std::uint64_t>(need_int("objective.seed", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.objective.seed); }});

  // net
  add({"net.hidden_sizes",
       [](ResolvedConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "auto") {
           c.pipeline.net.hidden_sizes.clear();
           return;
         }
         std::vector<std::size_t> sizes;
         for (const auto& part : split(t, ',')) sizes.push_back(need_size("net.hidden_sizes", part, 1));
         if (sizes.empty()) throw Error(ErrorKind::Config, "net.hidden_sizes: empty list");
         c.pipeline.net.hidden_sizes = std::move(sizes);
       },
       [](const ResolvedConfig& c) {
         if (c.pipeline.net.hidden_sizes.empty()) return std::string("auto");
         std::string out;
         for (std::size_t i = 0; i < c.pipeline.net.hidden_sizes.size(); ++i)
           out += (i ? "," : "") + std::to_string(c.pipeline.net.hidden_sizes[i]);
         return out;
       }});
  add({"net.hidden_activation",
       [](ResolvedConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "relu")
           c.pipeline.net.hidden_activation = Activation::Relu;
         else if (t == "tanh")
           c.pipeline.net.hidden_activation = Activation::Tanh;
         else
           throw Error(ErrorKind::Config, "net.hidden_activation: expected relu|tanh");
       },
       [](const ResolvedConfig& c) {
         return std::string(c.pipeline.net.hidden_activation == Activation::Relu ? "relu" : "tanh");
       }});
  add(fixed_entry("net.output_activation", "softmax"));
  add(fixed_entry("net.weight_init", "xavier"));
  add(fixed_entry("net.init_distribution", "normal"));
  add(double_entry("net.bias_init", &PipelineConfig::net, &NetworkConfig::bias_init));
  add(double_entry("net.learning_rate", &PipelineConfig::net, &NetworkConfig::learning_rate));
  add(double_entry("net.bias_learning_rate", &PipelineConfig::net, &NetworkConfig::bias_learning_rate));
  add(double_entry("net.momentum", &PipelineConfig::net, &NetworkConfig::momentum));
  add({"net.updater",
       [](ResolvedConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "nesterov")
           c.pipeline.net.updater = Updater::Nesterov;
         else if (t == "adadelta")
           c.pipeline.net.updater = Updater::Adadelta;
         else if (t == "rmsprop")
           c.pipeline.net.updater = Updater::Rmsprop;
         else if (t == "adam")
           c.pipeline.net.updater = Updater::Adam;
         else
           throw Error(ErrorKind::Config, "net.updater: expected nesterov|adadelta|rmsprop|adam");
       },
       [](const ResolvedConfig& c) {
         switch (c.pipeline.net.updater) {
           case Updater::Nesterov: return std::string("nesterov");
           case Updater::Adadelta: return std::string("adadelta");
           case Updater::Rmsprop: return std::string("rmsprop");
           default: return std::string("adam");
         }
       }});
  add(fixed_entry("net.optimization", "sgd"));
  add(fixed_entry("net.loss", "mcxent"));
  add(double_entry("net.grad_norm_threshold", &PipelineConfig::net, &NetworkConfig::grad_norm_threshold));
  add(double_entry("net.adadelta_rho", &PipelineConfig::net, &NetworkConfig::adadelta_rho));
  add(double_entry("net.adadelta_epsilon", &PipelineConfig::net, &NetworkConfig::adadelta_epsilon));
  add(double_entry("net.rmsprop_decay", &PipelineConfig::net, &NetworkConfig::rmsprop_decay));
  add(double_entry("net.adam_beta1", &PipelineConfig::net, &NetworkConfig::adam_beta1));
  add(double_entry("net.adam_beta2", &PipelineConfig::net, &NetworkConfig::adam_beta2));
  add({"net.epochs",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.net.epochs = need_size("net.epochs", v); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.net.epochs); }});
  add({"net.batch_size",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.net.batch_size = need_size("net.batch_size", v, 1); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.net.batch_size); }});
  add({"net.seed",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.net.seed = static_cast<std::uint64_t>(need_int("net.seed", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.net.seed); }});

  // eval
  add({"eval.protocol",
       [](ResolvedConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "kfold")
           c.pipeline.protocol = EvalProtocol::Kfold;
         else if (t == "holdout")
           c.pipeline.protocol = EvalProtocol::Holdout;
         else
           throw Error(ErrorKind::Config, "eval.protocol: expected kfold|holdout");
       },
       [](const ResolvedConfig& c) {
         return std::string(c.pipeline.protocol == EvalProtocol::Kfold ? "kfold" : "holdout");
       }});
  add({"eval.kfold",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.kfold = need_size("eval.kfold", v, 2); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.kfold); }});
  add({"eval.holdout_fraction",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.holdout_fraction = need_double("eval.holdout_fraction", v); },
       [](const ResolvedConfig& c) { return fmt_double(c.pipeline.holdout_fraction); }});
  add({"eval.seed",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.eval_seed = static_cast<std::uint64_t>(need_int("eval.seed", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.eval_seed); }});

  // report
  add({"report.decimals",
       [](ResolvedConfig& c, const std::string& v) { c.pipeline.report_decimals = static_cast<int>(need_size("report.decimals", v)); },
       [](const ResolvedConfig& c) { return std::to_string(c.pipeline.report_decimals); }});

  return reg;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> reg = build_registry();
  return reg;
}

const Entry& find_entry(const std::string& key) {
  for (const auto& e : registry())
    if (e.key == key) return e;
  throw Error(ErrorKind::Usage, "unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : registry()) keys.push_back(e.key);
  return keys;
}

void apply_setting(ResolvedConfig& cfg, const std::string& key, const std::string& value) {
  find_entry(trim(key)).set(cfg, value);
}

std::string get_setting(const ResolvedConfig& cfg, const std::string& key) {
  return find_entry(trim(key)).get(cfg);
}

void load_config_file(ResolvedConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage, path + ": line " + std::to_string(line_no) +
                                        " is not a 'key = value' setting");
    apply_setting(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void apply_env_seed(ResolvedConfig& cfg) {
  const char* env = std::getenv("GENESIFT_SEED");
  if (!env) return;
  auto v = parse_int(env);
  if (!v) throw Error(ErrorKind::Config, "GENESIFT_SEED: '" + std::string(env) + "' is not an integer");
  apply_global_seed(cfg, static_cast<std::uint64_t>(*v));
}

void apply_global_seed(ResolvedConfig& cfg, std::uint64_t seed) {
  cfg.pipeline.firefly.seed = seed;
  cfg.pipeline.elephant.seed = seed;
  cfg.pipeline.objective.seed = seed;
  cfg.pipeline.net.seed = seed;
  cfg.pipeline.eval_seed = seed;
}

std::string print_config(const ResolvedConfig& cfg) {
  std::ostringstream out;
  for (const auto& e : registry()) out << e.key << " = " << e.get(cfg) << '\n';
  return out.str();
}

}  // namespace genesift
