// qlm: command-line front end for the density-matrix language model.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qlm/qlm.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kIo = 1, kDomain = 2, kNumeric = 3 };

struct Globals {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string log_level;
};

struct TrainFlags {
  qlm::TrainConfig config;
  std::string mode = "whitespace";
};

void add_train_flags(CLI::App& cmd, TrainFlags& f) {
  auto& c = f.config;
  cmd.add_option("--dim", c.dim, "Density matrix dimension")->capture_default_str()->check(CLI::Range(2, 4096));
  cmd.add_option("--window", c.window, "Context window on each side")->capture_default_str();
  cmd.add_option("--negatives", c.negatives, "Negative samples per pair")->capture_default_str();
  cmd.add_option("--epochs", c.epochs, "Passes over the corpus")->capture_default_str();
  cmd.add_option("--lr", c.learning_rate, "Initial learning rate")->capture_default_str();
  cmd.add_option("--min-count", c.min_count, "Minimum word frequency")->capture_default_str();
  cmd.add_option("--subsample", c.subsample_t, "Subsampling threshold, 0 disables")->capture_default_str();
  cmd.add_option("--workers", c.workers, "Training threads")->capture_default_str();
  cmd.add_option("--init-noise", c.init_noise, "Initial factor noise scale")->capture_default_str();
  cmd.add_option("--mode", f.mode, "Tokenizer: whitespace or char")
      ->capture_default_str()
      ->check(CLI::IsMember({"whitespace", "char", "chars"}));
}

qlm::TokenizeMode tokenize_mode(const std::string& name) {
  const auto mode = qlm::parse_tokenize_mode(name);
  if (!mode) throw qlm::DomainError("unknown tokenizer mode '" + name + "'");
  return *mode;
}

std::vector<qlm::TokenStream> read_documents(const std::vector<std::string>& paths,
                                             qlm::TokenizeMode mode) {
  std::vector<qlm::TokenStream> docs;
  docs.reserve(paths.size());
  for (const auto& p : paths) docs.push_back(qlm::read_tokens(p, mode));
  return docs;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    qlm::write_file(path, text);
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------- commands

int cmd_build_vocab(const std::vector<std::string>& corpus, std::uint64_t min_count,
                    const std::string& mode, const std::string& out) {
  qlm::VocabularyBuilder builder;
  for (const auto& doc : read_documents(corpus, tokenize_mode(mode))) builder.add(doc);
  const auto vocab = builder.finish(min_count);
  qlm::save_vocab(vocab, out);
  qlm::log::info(std::to_string(vocab.size()) + " words written to " + out);
  std::cout << "words\t" << vocab.size() << "\ntokens\t" << vocab.total_count() << '\n';
  return kOk;
}

int cmd_train(const std::vector<std::string>& corpus, TrainFlags flags, const Globals& g,
              bool seed_set, const std::string& out) {
  if (seed_set) flags.config.seed = g.seed;
  const auto docs = read_documents(corpus, tokenize_mode(flags.mode));
  const auto result = qlm::train(docs, flags.config, [](std::size_t epoch, double loss) {
    std::cout << epoch << '\t' << fmt(loss) << '\n' << std::flush;
  });
  qlm::save_model(result.store, out);
  qlm::log::info(std::to_string(result.store.size()) + " words, " +
                 std::to_string(result.stats.pairs_processed) + " pairs, " +
                 fmt(result.stats.wall_seconds) + " s");
  return kOk;
}

int cmd_eval(const std::string& model, const std::string& dataset, const std::string& sim,
             const std::string& mode) {
  const auto store = qlm::load_model(model);
  const auto ds = qlm::load_similarity_dataset(dataset);
  for (const auto& w : ds.warnings) qlm::log::warn(w);
  const auto kind = qlm::parse_sim_kind(sim);
  if (!kind) throw qlm::DomainError("unknown similarity '" + sim + "'");
  const auto report = qlm::evaluate(store, ds, *kind, tokenize_mode(mode));
  std::cout << qlm::to_tsv(report) << '\n';
  return kOk;
}

int cmd_entropy(const std::string& model, bool per_period, TrainFlags flags, const Globals& g,
                bool seed_set, const std::string& manifest, const std::string& base,
                const std::string& out) {
  if (model.empty() == !per_period) {
    throw qlm::DomainError("entropy needs exactly one of --model and --train-per-period");
  }
  const qlm::LogBase log_base = base == "2" ? qlm::LogBase::two : qlm::LogBase::natural;
  const auto periods = qlm::partition_by_period(qlm::load_manifest(manifest), tokenize_mode(flags.mode));
  qlm::EntropySeries series;
  if (per_period) {
    if (seed_set) flags.config.seed = g.seed;
    series = qlm::period_entropy_series(periods, flags.config, log_base, g.threads);
  } else {
    series = qlm::period_entropy_series(qlm::load_model(model), periods, log_base);
  }
  write_output(out, qlm::to_csv(series));
  return kOk;
}

int cmd_swap_test(const std::string& model, const std::string& w1, const std::string& w2,
                  std::uint64_t shots, std::uint64_t seed) {
  const auto store = qlm::load_model(model);
  const auto rho = qlm::get_density(store, w1);
  const auto sigma = qlm::get_density(store, w2);
  const std::size_t d = store.dim();
  const std::size_t purif = qlm::circuit::purification_qubits(d);
  const double exact = qlm::circuit::swap_test_exact(rho, sigma);
  const auto shot = qlm::circuit::swap_test_sample(rho, sigma, shots, seed);
  const double sigma_p = std::sqrt(exact * (1.0 - exact) / static_cast<double>(shots));
  std::cout << "purification_qubits\t" << purif << '\n'
            << "control_qubits\t1\n"
            << "total_qubits\t" << qlm::circuit::swap_test_qubits(d) << '\n'
            << "hs\t" << fmt(qlm::hs_similarity(rho, sigma)) << '\n'
            << "exact_p0\t" << fmt(exact) << '\n'
            << "shots\t" << shot.shots << '\n'
            << "zeros\t" << shot.zeros << '\n'
            << "estimate_p0\t" << fmt(shot.estimate()) << '\n'
            << "stderr_p0\t" << fmt(sigma_p) << '\n'
            << "estimate_hs\t" << fmt(2.0 * shot.estimate() - 1.0) << '\n';
  return kOk;
}

int cmd_purify_check(const std::string& model, const std::string& word, std::uint64_t shots,
                     std::uint64_t seed) {
  const auto store = qlm::load_model(model);
  const auto rho = qlm::get_density(store, word);
  const std::size_t d = store.dim();
  const auto phi = qlm::circuit::purify(rho);
  const auto back = qlm::circuit::reduce_purification(phi, d);
  const double err = (back.matrix() - rho.matrix()).cwiseAbs().maxCoeff();
  const double exact = qlm::circuit::swap_test_exact(rho, rho);
  const auto shot = qlm::circuit::swap_test_sample(rho, rho, shots, seed);
  std::cout << "principal_qubits\t" << qlm::circuit::principal_qubits(d) << '\n'
            << "purification_qubits\t" << phi.num_qubits() << '\n'
            << "control_qubits\t1\n"
            << "recovery_max_abs_error\t" << fmt(err) << '\n'
            << "purity\t" << fmt(qlm::hs_similarity(rho, rho)) << '\n'
            << "entropy\t" << fmt(qlm::von_neumann_entropy(rho)) << '\n'
            << "exact_p0\t" << fmt(exact) << '\n'
            << "estimate_p0\t" << fmt(shot.estimate()) << '\n';
  return kOk;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const qlm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const qlm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const qlm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-matrix word embeddings: training, evaluation, entropy and swap tests", "qlm"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Parallel periods for per-period entropy")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off (overrides QLM_LOG)")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  // build-vocab
  std::vector<std::string> bv_corpus;
  std::uint64_t bv_min_count = 5;
  std::string bv_mode = "whitespace";
  std::string bv_out;
  auto* bv = app.add_subcommand("build-vocab", "Count words and write a vocabulary-only file");
  bv->add_option("--corpus", bv_corpus, "Corpus text files")->required()->expected(1, -1);
  bv->add_option("--min-count", bv_min_count, "Minimum word frequency")->capture_default_str();
  bv->add_option("--mode", bv_mode, "Tokenizer: whitespace or char")
      ->capture_default_str()
      ->check(CLI::IsMember({"whitespace", "char", "chars"}));
  bv->add_option("--out", bv_out, "Output path")->required();

  // train
  std::vector<std::string> tr_corpus;
  TrainFlags tr_flags;
  std::string tr_out;
  auto* tr = app.add_subcommand("train", "Train density-matrix embeddings");
  tr->add_option("--corpus", tr_corpus, "Corpus text files, one document each")->required()->expected(1, -1);
  add_train_flags(*tr, tr_flags);
  tr->add_option("--out", tr_out, "Model output path")->required();

  // eval
  std::string ev_model, ev_dataset, ev_sim = "hs", ev_mode = "whitespace";
  auto* ev = app.add_subcommand("eval", "Correlate model similarities with human ratings");
  ev->add_option("--model", ev_model, "Model file")->required();
  ev->add_option("--dataset", ev_dataset, "word1 word2 score file")->required();
  ev->add_option("--sim", ev_sim, "hs or uhlmann")->capture_default_str()->check(CLI::IsMember({"hs", "uhlmann"}));
  ev->add_option("--mode", ev_mode, "Tokenizer mode the model was trained with")
      ->capture_default_str()
      ->check(CLI::IsMember({"whitespace", "char", "chars"}));

  // entropy
  std::string en_model, en_manifest, en_base = "e", en_out;
  bool en_per_period = false;
  TrainFlags en_flags;
  auto* en = app.add_subcommand("entropy", "Von Neumann entropy of each period's ensemble state");
  en->add_option("--model", en_model, "Shared model for every period");
  en->add_flag("--train-per-period", en_per_period, "Train one model per period");
  en->add_option("--manifest", en_manifest, "period<TAB>path file")->required();
  en->add_option("--base", en_base, "Logarithm base: e or 2")->capture_default_str()->check(CLI::IsMember({"e", "2"}));
  en->add_option("--out", en_out, "CSV output path, stdout if omitted");
  add_train_flags(*en, en_flags);

  // swap-test
  std::string st_model, st_w1, st_w2;
  std::uint64_t st_shots = 10000;
  auto* st = app.add_subcommand("swap-test", "Simulate the swap test between two words");
  st->add_option("--model", st_model, "Model file")->required();
  st->add_option("--w1", st_w1, "First word")->required();
  st->add_option("--w2", st_w2, "Second word")->required();
  st->add_option("--shots", st_shots, "Measurement shots")->capture_default_str()->check(CLI::PositiveNumber);

  // purify-check
  std::string pc_model, pc_word;
  std::uint64_t pc_shots = 10000;
  auto* pc = app.add_subcommand("purify-check", "Purify one word and verify the reduced state");
  pc->add_option("--model", pc_model, "Model file")->required();
  pc->add_option("--word", pc_word, "Word")->required();
  pc->add_option("--shots", pc_shots, "Self swap-test shots")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDomain;
  }

  qlm::log::init_from_env();
  if (!g.log_level.empty()) qlm::log::set_level(g.log_level);
  const bool seed_set = seed_opt->count() > 0;

  return guarded([&] {
    if (bv->parsed()) return cmd_build_vocab(bv_corpus, bv_min_count, bv_mode, bv_out);
    if (tr->parsed()) return cmd_train(tr_corpus, tr_flags, g, seed_set, tr_out);
    if (ev->parsed()) return cmd_eval(ev_model, ev_dataset, ev_sim, ev_mode);
    if (en->parsed()) {
      return cmd_entropy(en_model, en_per_period, en_flags, g, seed_set, en_manifest, en_base, en_out);
    }
    if (st->parsed()) return cmd_swap_test(st_model, st_w1, st_w2, st_shots, g.seed);
    return cmd_purify_check(pc_model, pc_word, pc_shots, g.seed);
  });
}
