#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "byte_io.hpp"
#include "dragonfly/analytics.hpp"
#include "dragonfly/config_io.hpp"
#include "dragonfly/error.hpp"
#include "dragonfly/pipeline.hpp"
#include "dragonfly/token_file.hpp"
#include "dragonfly/version.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace dragonfly::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit code for a failure while setting up a run (config, weights, output dir).
int setup_exit_code(const Error& e) {
  return e.code() == ErrorCode::IOError ? kExitIO : kExitConfig;
}

struct InputItem {
  std::string image_id;
  fs::path path;
};

std::vector<InputItem> collect_inputs(const TokenizeOptions& opts) {
  std::vector<InputItem> items;
  for (const auto& p : opts.inputs) items.push_back({p.stem().string(), p});
  if (opts.list) {
    std::ifstream in(*opts.list);
    if (!in) throw Error(ErrorCode::IOError, "cannot read input list " + opts.list->string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorCode::ConfigError, "input list lines must be id<TAB>path");
      fs::path p = line.substr(tab + 1);
      if (p.is_relative()) p = opts.list->parent_path() / p;
      items.push_back({line.substr(0, tab), p});
    }
  }
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.image_id.empty()) throw Error(ErrorCode::ConfigError, "empty image id for " + item.path.string());
    if (!seen.insert(item.image_id).second) {
      throw Error(ErrorCode::ConfigError, "duplicate image id '" + item.image_id + "'");
    }
  }
  return items;
}

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IOError, "cannot create output directory " + dir.string());
  const fs::path probe = dir / ".dragonfly-write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw Error(ErrorCode::IOError, "output directory not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  detail::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

PipelineConfig resolve_config(const ConfigOverrides& o) {
  PipelineConfig config;
  if (o.config_path) config = load_config_file(*o.config_path, config);
  if (o.seed) config.seed = *o.seed;
  if (o.encoder_dim) config.encoder_dim = *o.encoder_dim;
  if (o.proj_dim) config.projection_dim = *o.proj_dim;
  if (o.stride) config.pool_stride = *o.stride;
  if (o.separator_policy) config.separator_policy = parse_separator_policy(*o.separator_policy);
  if (o.projection) config.projection = *o.projection;
  config.validate();
  return config;
}

std::string RunManifest::to_json() const {
  json j;
  j["config_digest"] = config_digest;
  j["entries"] = json::array();
  for (const auto& e : entries) {
    j["entries"].push_back(
        {{"image_id", e.image_id}, {"input", e.input}, {"output", e.output}, {"status", e.status}, {"error", e.error}});
  }
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("image_id").get<std::string>(), e.at("input").get<std::string>(),
                           e.at("output").get<std::string>(), e.at("status").get<std::string>(),
                           e.at("error").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad run manifest: ") + e.what());
  }
  return m;
}

int run_tokenize(const TokenizeOptions& opts, std::ostream& out, std::ostream& err, RunManifest* manifest_out) {
  std::optional<Pipeline> pipeline;
  std::vector<InputItem> items;
  try {
    PipelineConfig config = resolve_config(opts.config);
    items = collect_inputs(opts);
    pipeline.emplace(std::move(config));
    ensure_writable_dir(opts.out_dir);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return setup_exit_code(e);
  }

  RunManifest manifest;
  manifest.config_digest = config_digest(pipeline->config());
  manifest.entries.resize(items.size());
  detail::parallel_for(items.size(), opts.workers, [&](std::size_t i) {
    const InputItem& item = items[i];
    ManifestEntry& entry = manifest.entries[i];
    entry.image_id = item.image_id;
    entry.input = item.path.string();
    const fs::path target = opts.out_dir / (item.image_id + ".dftk");
    try {
      const ImageBuffer img = load_image(item.path);
      const TokenizeResult result = pipeline->run(img);
      write_token_file(target, result.sequence);
      entry.output = target.string();
      entry.status = "ok";
    } catch (const std::exception& e) {
      entry.status = "failed";
      entry.error = e.what();
    }
  });

  std::size_t failed = 0;
  for (const auto& e : manifest.entries) {
    if (e.status == "ok") {
      out << "ok\t" << e.image_id << "\t" << e.output << "\n";
    } else {
      ++failed;
      err << "failed\t" << e.image_id << "\t" << e.error << "\n";
    }
  }

  const fs::path manifest_path = opts.manifest.value_or(opts.out_dir / "manifest.json");
  try {
    write_text(manifest_path, manifest.to_json());
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitIO;
  }
  if (manifest_out) *manifest_out = manifest;
  return failed == 0 ? kExitOk : kExitFailure;
}

int run_stats(const StatsOptions& opts, std::ostream& out, std::ostream& err) {
  PipelineConfig config;
  std::vector<double> thresholds;
  ZoomBasis basis{};
  CdfFormat format{};
  try {
    config = resolve_config(opts.config);
    thresholds = parse_thresholds(opts.thresholds);
    basis = parse_zoom_basis(opts.basis);
    if (opts.format == "csv") format = CdfFormat::Csv;
    else if (opts.format == "json") format = CdfFormat::Json;
    else throw Error(ErrorCode::ConfigError, "unknown format '" + opts.format + "'");
  } catch (const Error& e) {
    err << e.what() << "\n";
    return setup_exit_code(e);
  }

  try {
    const auto bytes = detail::read_file(opts.manifest);
    const std::string text(bytes.begin(), bytes.end());
    const auto records = parse_corpus_manifest(text, opts.manifest.parent_path());
    const ZoomStats stats = corpus_zoom_stats(records, config, thresholds, basis);

    ensure_writable_dir(opts.out_dir);
    const fs::path cdf_path = opts.out_dir / (format == CdfFormat::Csv ? "zoom_cdf.csv" : "zoom_cdf.json");
    write_text(cdf_path, emit_cdf(stats, format));

    std::ostringstream summary;
    summary << "n\t" << stats.n << "\n";
    for (double t : thresholds) {
      summary << "at_least\t" << format_number(t) << "\t" << format_number(stats.fraction_at_least.at(t)) << "\n";
    }
    write_text(opts.out_dir / "zoom_summary.tsv", summary.str());
    out << summary.str();
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::IOError ? kExitIO : kExitFailure;
  }
}

int run_inspect(const fs::path& token_file, std::ostream& out, std::ostream& err) {
  TokenSequence seq;
  std::uint32_t version = 0;
  try {
    const auto bytes = detail::read_file(token_file);
    seq = decode_token_file(bytes);
    version = kTokenFileVersion;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::IOError ? kExitIO : kExitFailure;
  }
  out << "file\t" << token_file.string() << "\n";
  out << "version\t" << version << "\n";
  out << "dim\t" << seq.dim << "\n";
  out << "entries\t" << seq.size() << "\n";
  out << "image_tokens\t" << seq.image_token_count() << "\n";
  out << "separators\t" << seq.separator_count() << "\n";
  out << "segments\t" << seq.segments.size() << "\n";
  out << "segment\tkind\tcrop\ttokens\n";
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    out << i << "\t" << to_string(s.kind) << "\t" << s.crop_index << "\t" << s.token_count << "\n";
  }
  return kExitOk;
}

int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<Pipeline> pipeline;
  try {
    if (opts.count == 0 || opts.min_side == 0 || opts.min_side > opts.max_side) {
      throw Error(ErrorCode::ConfigError, "bench needs count >= 1 and 1 <= min-side <= max-side");
    }
    pipeline.emplace(resolve_config(opts.config));
  } catch (const Error& e) {
    err << e.what() << "\n";
    return setup_exit_code(e);
  }

  std::mt19937_64 rng(opts.corpus_seed);
  std::uniform_int_distribution<std::uint32_t> side(opts.min_side, opts.max_side);
  std::vector<Dims> sizes(opts.count);
  for (auto& d : sizes) d = {side(rng), side(rng)};

  std::vector<std::size_t> tokens(sizes.size());
  const auto start = std::chrono::steady_clock::now();
  detail::parallel_for(sizes.size(), opts.workers, [&](std::size_t i) {
    const ImageBuffer img = synthetic_image(sizes[i].w, sizes[i].h, opts.corpus_seed + i);
    tokens[i] = pipeline->run(img).sequence.image_token_count();
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::size_t total_tokens = 0;
  for (auto t : tokens) total_tokens += t;
  out << std::fixed << std::setprecision(3);
  out << "images\t" << sizes.size() << "\n";
  out << "seconds\t" << seconds << "\n";
  out << "images_per_second\t" << static_cast<double>(sizes.size()) / seconds << "\n";
  out << "tokens_per_second\t" << static_cast<double>(total_tokens) / seconds << "\n";
  return kExitOk;
}

namespace {

struct ConfigFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::uint32_t encoder_dim = 0;
  std::uint32_t proj_dim = 0;
  std::uint32_t stride = 0;
  std::string separator_policy;
  std::string projection;
  std::vector<CLI::Option*> options;

  void attach(CLI::App* app) {
    options = {
        app->add_option("--config", config_path, "JSON config file"),
        app->add_option("--seed", seed, "Encoder/projection seed"),
        app->add_option("--encoder-dim", encoder_dim, "Reference encoder width")->check(CLI::PositiveNumber),
        app->add_option("--proj-dim", proj_dim, "Projection output width")->check(CLI::PositiveNumber),
        app->add_option("--stride", stride, "Mean-pooling stride")->check(CLI::PositiveNumber),
        app->add_option("--separator-policy", separator_policy, "between_all | between_crops_only | none")
            ->check(CLI::IsMember({"between_all", "between_crops_only", "none"})),
        app->add_option("--projection", projection, "seeded | identity | path to DFPJ weights"),
    };
  }

  ConfigOverrides overrides() const {
    ConfigOverrides o;
    if (options[0]->count()) o.config_path = config_path;
    if (options[1]->count()) o.seed = seed;
    if (options[2]->count()) o.encoder_dim = encoder_dim;
    if (options[3]->count()) o.proj_dim = proj_dim;
    if (options[4]->count()) o.stride = stride;
    if (options[5]->count()) o.separator_policy = separator_policy;
    if (options[6]->count()) o.projection = projection;
    return o;
  }
};

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-resolution visual tokenizer"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  TokenizeOptions tok;
  std::vector<std::string> tok_inputs;
  std::string tok_list;
  std::string tok_manifest;
  std::string tok_out = ".";
  ConfigFlags tok_flags;
  auto* tokenize = app.add_subcommand("tokenize", "Tokenize images into DFTK files");
  tokenize->add_option("inputs", tok_inputs, "Image files (PNG, JPEG, DFIM)");
  auto* tok_list_opt = tokenize->add_option("--list", tok_list, "Input list: image_id<TAB>path per line");
  tokenize->add_option("--out", tok_out, "Output directory");
  auto* tok_manifest_opt = tokenize->add_option("--manifest", tok_manifest, "Run manifest path");
  tokenize->add_option("--workers", tok.workers, "Parallel images")->check(CLI::PositiveNumber);
  tok_flags.attach(tokenize);

  StatsOptions st;
  ConfigFlags st_flags;
  auto* stats = app.add_subcommand("stats", "Zoom-in ratio statistics over a corpus manifest");
  stats->add_option("--manifest", st.manifest, "Corpus manifest (id, width, height) or (id, path)")->required();
  stats->add_option("--out", st.out_dir, "Output directory");
  stats->add_option("--thresholds", st.thresholds, "Comma-separated zoom thresholds");
  stats->add_option("--format", st.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  stats->add_option("--basis", st.basis, "high | medium")->check(CLI::IsMember({"high", "medium"}));
  st_flags.attach(stats);

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize a DFTK token file");
  inspect->add_option("token_file", inspect_path, "Token file")->required();

  BenchOptions bench_opts;
  ConfigFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Throughput on a synthetic corpus");
  bench->add_option("--count", bench_opts.count, "Images");
  bench->add_option("--min-side", bench_opts.min_side, "Smallest side");
  bench->add_option("--max-side", bench_opts.max_side, "Largest side");
  bench->add_option("--corpus-seed", bench_opts.corpus_seed, "Synthetic corpus seed");
  bench->add_option("--workers", bench_opts.workers, "Parallel images")->check(CLI::PositiveNumber);
  bench_flags.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  if (tokenize->parsed()) {
    for (const auto& p : tok_inputs) tok.inputs.emplace_back(p);
    if (tok_list_opt->count()) tok.list = tok_list;
    if (tok_manifest_opt->count()) tok.manifest = tok_manifest;
    tok.out_dir = tok_out;
    tok.config = tok_flags.overrides();
    if (tok.inputs.empty() && !tok.list) {
      err << "tokenize: no inputs\n";
      return kExitConfig;
    }
    return run_tokenize(tok, out, err);
  }
  if (stats->parsed()) {
    st.config = st_flags.overrides();
    return run_stats(st, out, err);
  }
  if (inspect->parsed()) return run_inspect(inspect_path, out, err);
  bench_opts.config = bench_flags.overrides();
  return run_bench(bench_opts, out, err);
}

}  // namespace dragonfly::cli
