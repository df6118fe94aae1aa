#include "cli.hpp"

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lmac/arith_coder.hpp"
#include "lmac/container.hpp"
#include "lmac/error.hpp"
#include "lmac/estimator.hpp"
#include "lmac/ranker.hpp"

namespace lmac::cli {

namespace fs = std::filesystem;

ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  if (text == "uniform") {
    spec.kind = ModelSpec::Kind::kUniform;
    return spec;
  }
  if (text.rfind("ngram:", 0) == 0) {
    spec.kind = ModelSpec::Kind::kNgram;
    const std::string k = text.substr(6);
    if (k.empty() || k.find_first_not_of("0123456789") != std::string::npos || k.size() > 2) {
      throw Error(ErrorCode::kInvalidArgument, "bad n-gram order in '" + text + "'");
    }
    spec.order = static_cast<unsigned>(std::stoul(k));
    if (spec.order < 1 || spec.order > NgramModel::kMaxOrder) {
      throw Error(ErrorCode::kInvalidArgument, "n-gram order must be in [1, 8]");
    }
    return spec;
  }
  if (text == "bridge" || text.rfind("bridge:", 0) == 0) {
    spec.kind = ModelSpec::Kind::kBridge;
    if (text.size() > 7) spec.endpoint = text.substr(7);
    return spec;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown model spec '" + text + "' (uniform | ngram:k | bridge[:endpoint])");
}

namespace {

std::string bridge_endpoint(const RunConfig& config, const ModelSpec& spec) {
  if (const char* env = std::getenv(kBridgeEndpointEnv); env != nullptr && *env != '\0') return env;
  if (!spec.endpoint.empty()) return spec.endpoint;
  if (!config.bridge.empty()) return config.bridge;
  throw Error(ErrorCode::kInvalidArgument,
              "no bridge endpoint: use --model bridge:<endpoint>, --bridge or $" +
                  std::string(kBridgeEndpointEnv));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kInput, "error reading " + path.string());
  return ss.str();
}

}  // namespace

Toolchain build_toolchain(const RunConfig& config, TokenizerId tokenizer) {
  const ModelSpec spec = parse_model_spec(config.model);
  Toolchain tc;
  if (spec.kind == ModelSpec::Kind::kBridge || tokenizer == TokenizerId::kBridge) {
    tc.bridge = connect_bridge(bridge_endpoint(config, spec));
  }
  if (tokenizer == TokenizerId::kBridge) {
    tc.tokenizer = std::make_unique<BridgeTokenizer>(tc.bridge);
  } else {
    tc.tokenizer = std::make_unique<ByteTokenizer>();
  }
  const Vocabulary& vocab = tc.tokenizer->vocabulary();
  switch (spec.kind) {
    case ModelSpec::Kind::kUniform: tc.model = make_uniform_model(vocab); break;
    case ModelSpec::Kind::kNgram: tc.model = make_ngram_model(vocab, spec.order); break;
    case ModelSpec::Kind::kBridge: tc.model = make_bridge_model(tc.bridge, vocab); break;
  }
  return tc;
}

void write_file_atomic(const fs::path& path, const std::string& data) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInput, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kInput, "error writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kInput, "cannot move output into " + path.string());
  }
}

int cmd_compress(const RunConfig& config, std::ostream& out) {
  const TokenizerId tokenizer_id = parse_tokenizer_id(config.tokenizer);
  const std::string text = read_file(config.input);
  Toolchain tc = build_toolchain(config, tokenizer_id);

  const TokenStream tokens = tc.tokenizer->tokenize(text);
  const BitString payload = encode_stream(*tc.model, tokens);
  ContainerHeader header;
  header.tokenizer = tokenizer_id;
  header.model_id = tc.model->id();
  header.original_length = text.size();
  const auto bytes = write_container(header, payload);

  const fs::path dest = config.out.empty() ? fs::path(config.input.string() + ".lmac") : config.out;
  write_file_atomic(dest, std::string(bytes.begin(), bytes.end()));
  out << dest.string() << ": " << text.size() << " -> " << bytes.size() << " bytes, payload "
      << payload.size() << " bits\n";
  return kExitOk;
}

int cmd_decompress(const RunConfig& config, std::ostream& out) {
  const std::string raw = read_file(config.input);
  const Container container =
      read_container(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));

  fs::path dest = config.out;
  if (dest.empty()) {
    if (config.input.extension() != ".lmac") {
      throw Error(ErrorCode::kInvalidArgument, "--out is required unless the input ends in .lmac");
    }
    dest = config.input;
    dest.replace_extension();
  }

  Toolchain tc = build_toolchain(config, container.header.tokenizer);
  if (tc.model->id() != container.header.model_id) {
    throw Error(ErrorCode::kModelMismatch, "container was written with model '" +
                                                container.header.model_id + "', not '" +
                                                tc.model->id() + "'");
  }
  const BitString bits = BitString::from_bytes(container.payload, container.payload.size() * 8);
  const std::uint64_t n = container.header.original_length;
  const std::size_t max_tokens =
      container.header.tokenizer == TokenizerId::kByte ? n : 4 * n + 16;
  const TokenStream tokens =
      decode_stream(*tc.model, bits, container.header.tokenizer, max_tokens);
  const std::string text = tc.tokenizer->detokenize(tokens);
  if (text.size() != n) {
    throw Error(ErrorCode::kCorruptStream, "decoded " + std::to_string(text.size()) +
                                               " bytes, header says " + std::to_string(n));
  }
  write_file_atomic(dest, text);
  out << dest.string() << ": " << text.size() << " bytes\n";
  return kExitOk;
}

int cmd_estimate(const RunConfig& config, std::ostream& out) {
  const std::string text = read_file(config.input);
  Toolchain tc = build_toolchain(config, parse_tokenizer_id(config.tokenizer));
  const NllReport report = nll_bits(*tc.model, tc.tokenizer->tokenize(text));
  if (!config.out.empty()) {
    std::ostringstream tsv;
    write_nll_report(tsv, report);
    write_file_atomic(config.out, tsv.str());
  }
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(3) << "model:      " << tc.model->id() << '\n'
      << "mode:       estimated\n"
      << "tokens:     " << report.token_count() << " (including EOS)\n"
      << "nll bits:   " << report.total_bits << '\n'
      << "raw bits:   " << report.raw_total_bits << '\n';
  if (!text.empty()) {
    out << std::setprecision(4)
        << "ratio:      " << std::min(8.0 * text.size() / report.total_bits, kMaxReportedRatio)
        << '\n';
  }
  out.flags(flags);
  return kExitOk;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  const ChunkSet chunks = load_chunks(config.input, config.chunk_words, config.max_chunks);
  Toolchain tc = build_toolchain(config, parse_tokenizer_id(config.tokenizer));
  const CompressionReport report =
      evaluate_model(*tc.model, chunks, config.mode, *tc.tokenizer, config.jobs);
  if (!config.out.empty()) write_file_atomic(config.out, report_to_json(report));
  write_report_summary(out, report);
  return kExitOk;
}

int cmd_rank(const RunConfig& config, std::ostream& out) {
  std::vector<ModelScore> scores;
  for (const auto& path : config.reports) scores.push_back(score_of(report_from_json(read_file(path))));
  for (const auto& path : config.scores) {
    auto more = read_scores_csv(path);
    scores.insert(scores.end(), more.begin(), more.end());
  }
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "rank needs at least one report");

  RankingReport report;
  if (config.accuracy.empty()) {
    report.ranking = rank_models(scores);
  } else {
    report = correlation_report(scores, read_accuracy_csv(config.accuracy));
  }
  if (!config.out.empty()) write_file_atomic(config.out, ranking_to_json(report));
  write_ranking_summary(out, report);
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lossless text compression with language-model priors"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string mode = "estimated";

  const CLI::Validator model_spec(
      [](std::string& text) -> std::string {
        try {
          parse_model_spec(text);
        } catch (const Error& e) {
          return e.what();
        }
        return {};
      },
      "MODEL");
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "uniform | ngram:k | bridge[:endpoint]")
        ->capture_default_str()
        ->check(model_spec);
    sub->add_option("--bridge", cfg.bridge, "bridge endpoint (command, or replay:<file>)");
  };
  auto add_tokenizer = [&](CLI::App* sub) {
    sub->add_option("--tokenizer", cfg.tokenizer, "byte | bridge")
        ->capture_default_str()
        ->check(CLI::IsMember({"byte", "bridge"}));
  };

  auto* compress = app.add_subcommand("compress", "compress a file into an LMAC container");
  compress->add_option("input", cfg.input)->required();
  compress->add_option("--out", cfg.out, "output path (default: <input>.lmac)");
  add_model(compress);
  add_tokenizer(compress);

  auto* decompress = app.add_subcommand("decompress", "restore a file from an LMAC container");
  decompress->add_option("input", cfg.input)->required();
  decompress->add_option("--out", cfg.out, "output path");
  add_model(decompress);

  auto* estimate = app.add_subcommand("estimate", "code length from summed -log2 p, no coding");
  estimate->add_option("input", cfg.input)->required();
  estimate->add_option("--out", cfg.out, "write per-token bits (TSV)");
  add_model(estimate);
  add_tokenizer(estimate);

  auto* evaluate = app.add_subcommand("evaluate", "compression ratio over a chunked corpus");
  evaluate->add_option("corpus", cfg.input)->required();
  evaluate->add_option("--out", cfg.out, "write the JSON report here");
  evaluate->add_option("--mode", mode, "coded | estimated")
      ->capture_default_str()
      ->check(CLI::IsMember({"coded", "estimated"}));
  evaluate->add_option("--chunk-words", cfg.chunk_words)->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_option("--max-chunks", cfg.max_chunks)->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_option("--jobs", cfg.jobs)->capture_default_str()->check(CLI::PositiveNumber);
  add_model(evaluate);
  add_tokenizer(evaluate);

  auto* rank = app.add_subcommand("rank", "rank models by ratio and correlate with accuracies");
  rank->add_option("--report", cfg.reports, "JSON compression report (repeatable)");
  rank->add_option("--scores", cfg.scores, "CSV with header model,ratio (repeatable)");
  rank->add_option("--accuracy", cfg.accuracy, "CSV with header model,task,accuracy,source");
  rank->add_option("--out", cfg.out, "write the JSON ranking report here");

  std::vector<std::string> argv{"lmac"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "lmac: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    cfg.mode = parse_eval_mode(mode);
    if (compress->parsed()) return cmd_compress(cfg, out);
    if (decompress->parsed()) return cmd_decompress(cfg, out);
    if (estimate->parsed()) return cmd_estimate(cfg, out);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out);
    if (rank->parsed()) return cmd_rank(cfg, out);
  } catch (const Error& e) {
    err << "lmac: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "lmac: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace lmac::cli
