#include "hdptm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "hdptm/baselines.hpp"
#include "hdptm/corpus.hpp"
#include "hdptm/eval.hpp"
#include "hdptm/numerics.hpp"
#include "hdptm/pcsvb0.hpp"
#include "hdptm/snapshot.hpp"

namespace hdptm {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Expands "--config FILE" into --key=value tokens appended after the user's
// own flags. Keys the command line already sets are skipped, so explicit
// flags always win over the file.
std::vector<std::string> expand_config_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string token = argv[i];
    if (token == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else if (token.rfind("--config=", 0) == 0) {
      config_path = token.substr(9);
    } else {
      args.push_back(token);
    }
  }
  if (config_path.empty()) {
    return args;
  }

  std::ifstream in(config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + config_path);
  }
  const auto user_set = [&args](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& token : args) {
      if (token == flag || token.rfind(flag + "=", 0) == 0) {
        return true;
      }
    }
    return false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument(config_path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!user_set(key)) {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

void add_schedule_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--rho-c-s", cfg.rho_c_s, "corpus schedule scale s");
  cmd->add_option("--rho-c-tau", cfg.rho_c_tau, "corpus schedule offset tau");
  cmd->add_option("--rho-d-s", cfg.rho_d_s, "document schedule scale s");
  cmd->add_option("--rho-d-tau", cfg.rho_d_tau, "document schedule offset tau");
  cmd->add_option("--rho-h-s", cfg.rho_h_s, "stick/hyper schedule scale s");
  cmd->add_option("--rho-h-tau", cfg.rho_h_tau, "stick/hyper schedule offset tau");
  cmd->add_option("--kappa", cfg.kappa, "decay exponent shared by all schedules");
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--T", cfg.T, "truncation level for pcsvb0/pcvb0");
  cmd->add_option("--scvb-k", cfg.scvb_k, "fixed topic count for scvb0");
  cmd->add_option("--scvb-alpha", cfg.scvb_alpha, "symmetric document prior for scvb0");
  cmd->add_option("--beta", cfg.beta, "topic-Dirichlet smoothing");
  cmd->add_option("--alpha0", cfg.alpha0, "initial alpha");
  cmd->add_option("--gamma0", cfg.gamma0, "initial gamma");
  cmd->add_option("--epochs", cfg.epochs, "training epochs (iterations for pcvb0)");
  cmd->add_option("--seed", cfg.seed, "run seed");
  cmd->add_flag("--no-hyper-updates", cfg.no_hyper_updates,
                "freeze sticks, pi, alpha and gamma");
}

ScheduleConfig schedule(double s, double tau, double kappa) {
  return ScheduleConfig{s, tau, kappa};
}

TrainerConfig make_trainer_config(const RunConfig& cfg) {
  TrainerConfig out;
  out.kind = ModelKind::hdp;
  out.truncation = cfg.T;
  out.beta = cfg.beta;
  out.alpha0 = cfg.alpha0;
  out.gamma0 = cfg.gamma0;
  out.doc_schedule = schedule(cfg.rho_d_s, cfg.rho_d_tau, cfg.kappa);
  out.corpus_schedule = schedule(cfg.rho_c_s, cfg.rho_c_tau, cfg.kappa);
  out.hyper_schedule = schedule(cfg.rho_h_s, cfg.rho_h_tau, cfg.kappa);
  out.epochs = cfg.epochs;
  out.seed = cfg.seed;
  out.hyper_updates_enabled = !cfg.no_hyper_updates;
  return out;
}

ScvbConfig make_scvb_config(const RunConfig& cfg) {
  ScvbConfig out;
  out.topics = cfg.scvb_k;
  out.alpha_fixed = cfg.scvb_alpha;
  out.beta = cfg.beta;
  out.doc_schedule = schedule(cfg.rho_d_s, cfg.rho_d_tau, cfg.kappa);
  out.corpus_schedule = schedule(cfg.rho_c_s, cfg.rho_c_tau, cfg.kappa);
  out.epochs = cfg.epochs;
  out.seed = cfg.seed;
  return out;
}

PcvbConfig make_pcvb_config(const RunConfig& cfg) {
  PcvbConfig out;
  out.truncation = cfg.T;
  out.beta = cfg.beta;
  out.alpha0 = cfg.alpha0;
  out.gamma0 = cfg.gamma0;
  out.iterations = cfg.epochs;
  out.seed = cfg.seed;
  return out;
}

std::vector<Algorithm> parse_algorithm_list(const std::string& list) {
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(parse_algorithm(item));
    }
  }
  if (out.empty()) {
    throw std::invalid_argument("no algorithms selected");
  }
  return out;
}

// validation beyond what the option parser can express; throws
// invalid_argument so the caller maps it to exit code 2
void validate(const RunConfig& cfg) {
  parse_corpus_format(cfg.format);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw std::invalid_argument("--train-fraction must lie in (0, 1)");
  }
  if (!(cfg.estimation_fraction > 0.0 && cfg.estimation_fraction < 1.0)) {
    throw std::invalid_argument("--estimation-fraction must lie in (0, 1)");
  }
  if (cfg.passes < 1) {
    throw std::invalid_argument("--passes must be at least 1");
  }
  if (cfg.command == "train" || cfg.command == "experiment") {
    const auto algorithms = cfg.command == "train"
                                ? std::vector<Algorithm>{parse_algorithm(cfg.algorithm)}
                                : parse_algorithm_list(cfg.algorithms);
    for (const Algorithm a : algorithms) {
      switch (a) {
        case Algorithm::pcsvb0:
          make_trainer_config(cfg).validate();
          break;
        case Algorithm::scvb0:
          make_scvb_config(cfg).validate();
          break;
        case Algorithm::pcvb0:
          make_pcvb_config(cfg).validate();
          if (cfg.epochs < 1) {
            throw std::invalid_argument("--epochs must be at least 1");
          }
          break;
      }
    }
  } else {
    schedule(cfg.rho_d_s, cfg.rho_d_tau, cfg.kappa).make();
  }
}

std::uint32_t effective_topics(const GlobalState& state, double mass_fraction) {
  std::vector<double> totals(state.truncation());
  double total = 0.0;
  for (std::uint32_t k = 0; k < state.truncation(); ++k) {
    totals[k] = state.topic_total(k);
    total += totals[k];
  }
  std::sort(totals.begin(), totals.end(), std::greater<>());
  double acc = 0.0;
  std::uint32_t m = 0;
  for (const double t : totals) {
    if (acc >= mass_fraction * total) {
      break;
    }
    acc += t;
    ++m;
  }
  return std::max<std::uint32_t>(m, 1);
}

void write_config_echo(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = std::filesystem::path(cfg.output_dir) / "config.txt";
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write config echo: " + path.string());
  }
  out << emit_config_echo(cfg);
  if (!out) {
    throw std::runtime_error("failed writing config echo: " + path.string());
  }
}

int cmd_train(const RunConfig& cfg) {
  write_config_echo(cfg);
  auto [corpus, vocab] = load_corpus(cfg.corpus_path, parse_corpus_format(cfg.format));

  const auto progress_path = std::filesystem::path(cfg.output_dir) / "progress.csv";
  std::ofstream progress(progress_path);
  if (!progress) {
    throw std::runtime_error("cannot write progress file: " + progress_path.string());
  }
  progress << "documents_seen,epoch,alpha,gamma,effective_topics\n";
  const std::size_t d_train = corpus.doc_count();
  const TrainHook hook = [&](std::size_t documents_seen, const GlobalState& state) {
    if (documents_seen % d_train == 0) {
      progress << documents_seen << ',' << documents_seen / d_train << ','
               << format_double(state.alpha) << ',' << format_double(state.gamma) << ','
               << effective_topics(state, 0.95) << '\n';
      progress.flush();
    }
  };

  const Algorithm algorithm = parse_algorithm(cfg.algorithm);
  GlobalState state = [&] {
    switch (algorithm) {
      case Algorithm::pcsvb0:
        return train_pcsvb0(corpus, vocab.size(), make_trainer_config(cfg), hook);
      case Algorithm::scvb0:
        return scvb0_train(corpus, vocab.size(), make_scvb_config(cfg), hook);
      case Algorithm::pcvb0: {
        Pcvb0Model model(corpus, vocab.size(), make_pcvb_config(cfg));
        for (std::uint32_t it = 1; it <= cfg.epochs; ++it) {
          model.sweep();
          hook(it * d_train, model.state());
        }
        return model.state();
      }
    }
    throw std::logic_error("unreachable algorithm");
  }();

  const auto model_path = std::filesystem::path(cfg.output_dir) / "model.bin";
  save_snapshot(model_path.string(), state, vocab);
  std::cout << "trained " << cfg.algorithm << " on " << corpus.doc_count() << " documents ("
            << corpus.total_tokens() << " tokens, V=" << vocab.size() << ")\n"
            << "model: " << model_path.string() << "\n"
            << "progress: " << progress_path.string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  Snapshot snapshot = load_snapshot(cfg.model_path);
  auto [corpus, file_vocab] = load_corpus(cfg.corpus_path, parse_corpus_format(cfg.format));

  // map the evaluation corpus onto the model vocabulary; unseen terms cannot
  // be scored and are dropped
  std::size_t dropped_tokens = 0;
  std::vector<Document> remapped;
  for (const auto& doc : corpus.documents) {
    Document out;
    out.tokens.reserve(doc.tokens.size());
    for (const std::uint32_t w : doc.tokens) {
      const auto& term = file_vocab.terms[w];
      const auto it = snapshot.vocab.index.find(term);
      if (it == snapshot.vocab.index.end()) {
        ++dropped_tokens;
      } else {
        out.tokens.push_back(it->second);
      }
    }
    remapped.push_back(std::move(out));
  }
  if (dropped_tokens > 0) {
    std::cerr << "warning: dropped " << dropped_tokens
              << " token(s) outside the model vocabulary\n";
  }

  std::vector<HeldOutDocument> heldout;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < remapped.size(); ++i) {
    if (remapped[i].length() < 2) {
      ++excluded;
      continue;
    }
    heldout.push_back(
        split_tokens(remapped[i], cfg.estimation_fraction, mix_seed(cfg.seed, i)));
  }
  if (excluded > 0) {
    std::cerr << "warning: excluded " << excluded
              << " document(s) with fewer than 2 usable tokens\n";
  }
  if (heldout.empty()) {
    throw std::runtime_error("no documents with at least 2 usable tokens");
  }

  const ScheduleConfig est_schedule = schedule(cfg.rho_d_s, cfg.rho_d_tau, cfg.kappa);
  std::vector<DocState> doc_states;
  std::vector<std::vector<std::uint32_t>> eval_tokens;
  doc_states.reserve(heldout.size());
  eval_tokens.reserve(heldout.size());
  std::size_t n_eval = 0;
  for (const auto& h : heldout) {
    doc_states.push_back(estimate_heldout_doc(snapshot.state, h, cfg.passes, est_schedule));
    eval_tokens.push_back(h.evaluation_tokens);
    n_eval += h.evaluation_tokens.size();
  }
  const double px = perplexity(snapshot.state, doc_states, eval_tokens, cfg.threads);
  std::cout << "held-out perplexity: " << format_double(px) << " (" << heldout.size()
            << " documents, " << n_eval << " evaluation tokens)\n";
  return 0;
}

int cmd_experiment(const RunConfig& cfg) {
  write_config_echo(cfg);
  ExperimentConfig exp;
  exp.corpus_path = cfg.corpus_path;
  exp.format = parse_corpus_format(cfg.format);
  exp.algorithms = parse_algorithm_list(cfg.algorithms);
  exp.train_fraction = cfg.train_fraction;
  exp.estimation_fraction = cfg.estimation_fraction;
  exp.heldout_passes = cfg.passes;
  exp.seed = cfg.seed;
  exp.pcsvb0 = make_trainer_config(cfg);
  exp.scvb0 = make_scvb_config(cfg);
  exp.pcvb0 = make_pcvb_config(cfg);
  exp.output_dir = cfg.output_dir;
  exp.timing = !cfg.no_timing;
  exp.threads = cfg.threads;

  const auto results = run_experiment(exp);
  for (const auto& [algorithm, records] : results) {
    const auto path = std::filesystem::path(cfg.output_dir) /
                      (std::string(algorithm_name(algorithm)) + ".csv");
    std::cout << algorithm_name(algorithm) << ": " << records.size() << " records, final "
              << (records.empty() ? std::string("n/a")
                                  : format_double(records.back().perplexity))
              << " -> " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

std::string emit_config_echo(const RunConfig& cfg) {
  std::ostringstream out;
  out << "# hdptm " << cfg.command << " configuration\n";
  auto str = [&](const char* key, const std::string& value) {
    out << key << "=\"" << value << "\"\n";
  };
  auto num = [&](const char* key, double value) {
    out << key << '=' << format_double(value) << '\n';
  };
  auto integer = [&](const char* key, std::uint64_t value) {
    out << key << '=' << value << '\n';
  };
  auto flag = [&](const char* key, bool value) {
    out << key << '=' << (value ? "true" : "false") << '\n';
  };

  str("corpus", cfg.corpus_path);
  str("format", cfg.format);
  if (cfg.command == "train") {
    str("algorithm", cfg.algorithm);
  }
  if (cfg.command == "experiment") {
    str("algorithms", cfg.algorithms);
  }
  if (cfg.command == "eval") {
    str("model", cfg.model_path);
  } else {
    str("out", cfg.output_dir);
  }

  if (cfg.command != "eval") {
    integer("T", cfg.T);
    integer("scvb-k", cfg.scvb_k);
    num("scvb-alpha", cfg.scvb_alpha);
    num("beta", cfg.beta);
    num("alpha0", cfg.alpha0);
    num("gamma0", cfg.gamma0);
    num("rho-c-s", cfg.rho_c_s);
    num("rho-c-tau", cfg.rho_c_tau);
    num("rho-h-s", cfg.rho_h_s);
    num("rho-h-tau", cfg.rho_h_tau);
    integer("epochs", cfg.epochs);
    flag("no-hyper-updates", cfg.no_hyper_updates);
  }
  num("rho-d-s", cfg.rho_d_s);
  num("rho-d-tau", cfg.rho_d_tau);
  num("kappa", cfg.kappa);
  if (cfg.command == "experiment") {
    num("train-fraction", cfg.train_fraction);
    flag("no-timing", cfg.no_timing);
  }
  if (cfg.command != "train") {
    num("estimation-fraction", cfg.estimation_fraction);
    integer("passes", cfg.passes);
    integer("threads", cfg.threads);
  }
  integer("seed", cfg.seed);
  return out.str();
}

int parse_and_dispatch(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string config_file;  // consumed by the pre-scan; registered for --help only
  CLI::App app{"Stochastic and batch collapsed variational inference for HDP/LDA topic models"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "fit one algorithm and write a model snapshot");
  train->add_option("--corpus", cfg.corpus_path, "corpus file")->required();
  train->add_option("--format", cfg.format, "corpus format: plain | uci-bow");
  train->add_option("--algorithm", cfg.algorithm, "pcsvb0 | scvb0 | pcvb0");
  train->add_option("--out", cfg.output_dir, "output directory");
  add_model_options(train, cfg);
  add_schedule_options(train, cfg);
  train->add_option("--config", config_file, "key=value file pre-seeding the flags");

  auto* eval_cmd = app.add_subcommand("eval", "score a held-out corpus with a saved model");
  eval_cmd->add_option("--model", cfg.model_path, "model snapshot")->required();
  eval_cmd->add_option("--corpus", cfg.corpus_path, "held-out corpus file")->required();
  eval_cmd->add_option("--format", cfg.format, "corpus format: plain | uci-bow");
  eval_cmd->add_option("--estimation-fraction", cfg.estimation_fraction,
                       "fraction of tokens used to estimate document parameters");
  eval_cmd->add_option("--passes", cfg.passes, "estimation passes per document");
  eval_cmd->add_option("--seed", cfg.seed, "token-split seed");
  eval_cmd->add_option("--threads", cfg.threads, "evaluation worker threads");
  eval_cmd->add_option("--rho-d-s", cfg.rho_d_s, "document schedule scale s");
  eval_cmd->add_option("--rho-d-tau", cfg.rho_d_tau, "document schedule offset tau");
  eval_cmd->add_option("--kappa", cfg.kappa, "schedule decay exponent");
  eval_cmd->add_option("--config", config_file, "key=value file pre-seeding the flags");

  auto* experiment = app.add_subcommand(
      "experiment", "shared splits, one training run per algorithm, perplexity curves");
  experiment->add_option("--corpus", cfg.corpus_path, "corpus file")->required();
  experiment->add_option("--format", cfg.format, "corpus format: plain | uci-bow");
  experiment->add_option("--algorithms", cfg.algorithms, "comma list of pcsvb0,scvb0,pcvb0");
  experiment->add_option("--out", cfg.output_dir, "output directory");
  experiment->add_option("--train-fraction", cfg.train_fraction,
                         "fraction of documents used for training");
  experiment->add_option("--estimation-fraction", cfg.estimation_fraction,
                         "fraction of held-out tokens used for estimation");
  experiment->add_option("--passes", cfg.passes, "estimation passes per held-out document");
  experiment->add_option("--threads", cfg.threads, "evaluation worker threads");
  experiment->add_flag("--no-timing", cfg.no_timing,
                       "write wall_ms as 0 so reruns are byte-identical");
  add_model_options(experiment, cfg);
  add_schedule_options(experiment, cfg);
  experiment->add_option("--config", config_file, "key=value file pre-seeding the flags");

  try {
    auto args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes back to front
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  cfg.command = train->parsed() ? "train" : eval_cmd->parsed() ? "eval" : "experiment";
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cfg.command == "train") {
      return cmd_train(cfg);
    }
    if (cfg.command == "eval") {
      return cmd_eval(cfg);
    }
    return cmd_experiment(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hdptm
