#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>

#include "CLI11.hpp"

#include "cuescreen/baseline.hpp"
#include "cuescreen/chat_parser.hpp"
#include "cuescreen/corpus.hpp"
#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/evaluator.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/llm_gateway.hpp"
#include "cuescreen/prompt_compiler.hpp"
#include "cuescreen/synth.hpp"
#include "cuescreen/version.hpp"

namespace cuescreen::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---- run configuration ---------------------------------------------------------

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::string mode = "cot";
  unsigned long long seed = kDefaultSeed;
  std::string endpoint = "mock";
  std::string base_url = gateway::EndpointConfig{}.base_url;
  std::string model = gateway::EndpointConfig{}.model_name;
  std::string api_key_env = gateway::EndpointConfig{}.api_key_env;
  std::string templates;
  double threshold = 0.5;
  std::string split_policy;
  std::string speaker = "PAR";
  std::string lexicon;
  std::string manifest;
  std::string analysis;
  std::string completions;
  int max_retries = 2;
  double timeout = 30.0;
  std::size_t concurrency = 4;
};

struct BaselineOptions {
  std::string model = "lda";
  std::string model_out;
  std::string model_in;
  double lr = 0.1;
  std::size_t epochs = 500;
  double l2 = 0.0;
  bool no_standardize = false;
};

struct EvalOptions {
  std::vector<std::string> predictions;
  std::vector<std::string> names;
  std::vector<std::string> order;
  std::string report;
  std::string csv;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

prompt::TemplateSet load_templates(const RunConfig& cfg) {
  return cfg.templates.empty() ? prompt::TemplateSet::builtin() : prompt::TemplateSet::load(cfg.templates);
}

cues::CueLexicon load_lexicon(const RunConfig& cfg) {
  return cfg.lexicon.empty() ? cues::CueLexicon::standard() : cues::CueLexicon::load(cfg.lexicon);
}

/// Everything needed to reproduce a run. Wall-clock time lives only under
/// "timestamps".
void write_run_manifest(const fs::path& path, const RunConfig& cfg, const json& extra = json::object()) {
  json j;
  j["tool"] = "cuescreen";
  j["version"] = kLibraryVersion;
  j["subcommand"] = cfg.subcommand;
  json c;
  c["input"] = cfg.input;
  c["output"] = cfg.output;
  c["mode"] = cfg.mode;
  c["endpoint"] = cfg.endpoint;
  c["base_url"] = cfg.endpoint == "external" ? cfg.base_url : "";
  c["model"] = cfg.model;
  c["templates"] = cfg.templates.empty() ? "builtin" : cfg.templates;
  c["threshold"] = cfg.threshold;
  c["split_policy"] = cfg.split_policy;
  c["speaker"] = cfg.speaker;
  c["lexicon"] = cfg.lexicon.empty() ? "builtin" : cfg.lexicon;
  c["manifest"] = cfg.manifest;
  c["analysis"] = cfg.analysis;
  j["config"] = std::move(c);
  j["seed"] = cfg.seed;
  const auto templates = load_templates(cfg);
  j["template_version"] = templates.version();
  j["template_fingerprint"] = templates.fingerprint();
  json modules = json::object();
  for (const auto& [name, version] : kModuleVersions) modules[std::string(name)] = version;
  j["module_versions"] = std::move(modules);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  j["timestamps"] = {{"finished_utc", utc_now()}};
  io::write_file_atomic(path, j.dump(2) + "\n");
}

fs::path run_manifest_for_file(const fs::path& output) {
  fs::path p = output;
  p += ".run.json";
  return p;
}

std::vector<chat::CleanTranscript> read_transcripts(const fs::path& path) {
  std::vector<chat::CleanTranscript> out;
  for (const auto& [line, value] : io::read_jsonl(path)) {
    try {
      out.push_back(chat::clean_transcript_from_json(value));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.detail(), line);
    }
  }
  return out;
}

std::map<std::string, cues::Analysis> read_analysis(const fs::path& path) {
  std::map<std::string, cues::Analysis> out;
  for (const auto& [line, value] : io::read_jsonl(path)) {
    try {
      auto a = cues::analysis_from_json(value);
      out.emplace(a.participant_id, std::move(a));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.detail(), line);
    }
  }
  return out;
}

std::vector<prompt::PromptBundle> read_bundles(const fs::path& path) {
  std::vector<prompt::PromptBundle> out;
  for (const auto& [line, value] : io::read_jsonl(path)) {
    try {
      out.push_back(prompt::bundle_from_json(value));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.detail(), line);
    }
  }
  return out;
}

// ---- stages ------------------------------------------------------------------

struct ChaSource {
  std::string participant_id;
  fs::path path;
};

std::vector<ChaSource> cha_sources(const fs::path& input) {
  std::vector<ChaSource> sources;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".cha") {
        sources.push_back({entry.path().stem().string(), entry.path()});
      }
    }
  } else if (input.extension() == ".jsonl") {
    const auto corpus = corpus::load_manifest(input);
    for (const auto& r : corpus.records) {
      fs::path p = r.transcript_path;
      if (p.is_relative()) p = input.parent_path() / p;
      sources.push_back({r.participant_id, p});
    }
  } else {
    sources.push_back({input.stem().string(), input});
  }
  std::sort(sources.begin(), sources.end(),
            [](const ChaSource& a, const ChaSource& b) { return a.participant_id < b.participant_id; });
  return sources;
}

std::string stage_parse(const fs::path& input, const std::string& speaker) {
  std::vector<chat::CleanTranscript> transcripts;
  for (const auto& src : cha_sources(input)) {
    try {
      const auto doc = chat::parse_document(io::read_text_file(src.path), src.participant_id);
      transcripts.push_back(chat::extract_participant_text(doc, speaker));
    } catch (const Error& e) {
      throw Error(e.code(), src.path.string() + ": " + e.detail(), e.line());
    }
  }
  return io::to_jsonl(transcripts, [](const chat::CleanTranscript& t) { return chat::to_json(t); });
}

std::string stage_analyze(const fs::path& transcripts_path, const cues::CueLexicon& lexicon) {
  std::vector<cues::Analysis> analyses;
  for (const auto& t : read_transcripts(transcripts_path)) analyses.push_back(cues::analyze(t, lexicon));
  return io::to_jsonl(analyses, [](const cues::Analysis& a) { return cues::to_json(a); });
}

std::string stage_prompt(const RunConfig& cfg, const fs::path& transcripts_path) {
  const auto mode = prompt::parse_mode(cfg.mode);
  if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown mode '" + cfg.mode + "'");
  const auto templates = load_templates(cfg);
  const auto transcripts = read_transcripts(transcripts_path);

  std::optional<corpus::Corpus> manifest;
  if (!cfg.manifest.empty()) manifest = corpus::load_manifest(cfg.manifest);

  std::map<std::string, cues::Analysis> analysis;
  if (*mode == prompt::Mode::Cot) {
    if (cfg.analysis.empty()) throw Error(ErrorCode::MissingCueReport, "cot mode needs --analysis");
    analysis = read_analysis(cfg.analysis);
  }

  std::vector<prompt::Exemplar> exemplars;
  if (*mode == prompt::Mode::FewShot) {
    if (!manifest) throw Error(ErrorCode::EmptyExemplars, "few_shot mode needs --manifest with a train split");
    std::vector<prompt::ExemplarCandidate> pool;
    for (const auto* r : manifest->in_split(Split::Train)) pool.push_back({r->participant_id, r->label});
    for (const auto& id : prompt::select_exemplars(pool, cfg.seed)) {
      const auto it = std::find_if(transcripts.begin(), transcripts.end(),
                                   [&](const chat::CleanTranscript& t) { return t.participant_id == id; });
      if (it == transcripts.end()) throw Error(ErrorCode::EmptyExemplars, "no transcript for exemplar " + id);
      exemplars.push_back({*it, manifest->find(id)->label});
    }
  }

  const bool test_only = manifest && !manifest->in_split(Split::Test).empty();
  std::vector<prompt::PromptBundle> bundles;
  for (const auto& t : transcripts) {
    if (test_only) {
      const auto* r = manifest->find(t.participant_id);
      if (r == nullptr || r->split != Split::Test) continue;
    }
    const cues::CueReport* report = nullptr;
    if (*mode == prompt::Mode::Cot) {
      const auto it = analysis.find(t.participant_id);
      if (it == analysis.end()) throw Error(ErrorCode::MissingCueReport, "no analysis for " + t.participant_id);
      report = &it->second.cues;
    }
    bundles.push_back(prompt::build_prompt(*mode, t, report, exemplars, templates));
  }
  return io::to_jsonl(bundles, [](const prompt::PromptBundle& b) { return prompt::to_json(b); });
}

gateway::EndpointConfig endpoint_config(const RunConfig& cfg) {
  gateway::EndpointConfig ec;
  ec.base_url = cfg.base_url;
  ec.model_name = cfg.model;
  ec.api_key_env = cfg.api_key_env;
  ec.max_retries = cfg.max_retries;
  ec.timeout_seconds = cfg.timeout;
  ec.jitter_seed = cfg.seed;
  gateway::validate(ec);
  return ec;
}

struct ClassifyOutput {
  std::string predictions;
  std::string completions;
};

ClassifyOutput stage_classify(const RunConfig& cfg, const fs::path& bundles_path) {
  const auto bundles = read_bundles(bundles_path);
  const auto ec = endpoint_config(cfg);
  std::unique_ptr<gateway::Transport> transport;
  if (cfg.endpoint == "mock") {
    transport = std::make_unique<gateway::MockTransport>(gateway::MockRule{cfg.threshold});
  } else if (cfg.endpoint == "external") {
    transport = std::make_unique<gateway::HttpTransport>(ec.base_url, ec.timeout_seconds);
  } else {
    throw Error(ErrorCode::InvalidConfig, "endpoint must be mock or external");
  }
  auto result = gateway::classify_all(bundles, ec, *transport, cfg.concurrency);
  if (cfg.endpoint == "mock") {
    for (auto& p : result.predictions) p.source = PredictionSource::Mock;
  }
  return {eval::predictions_jsonl(result.predictions),
          io::to_jsonl(result.records, [](const gateway::CompletionRecord& r) { return gateway::to_json(r); })};
}

struct EvalOutput {
  std::string metrics;
  std::string report;
  std::string csv;
};

EvalOutput stage_eval(const std::vector<std::string>& prediction_files, std::vector<std::string> names,
                      const std::vector<std::string>& order, const corpus::Corpus& gold) {
  if (names.empty()) {
    for (const auto& f : prediction_files) names.push_back(fs::path(f).stem().string());
  }
  if (names.size() != prediction_files.size()) {
    throw Error(ErrorCode::InvalidConfig, "--name must be given once per --predictions");
  }
  std::vector<eval::ReportRow> rows;
  json runs = json::array();
  for (std::size_t i = 0; i < prediction_files.size(); ++i) {
    const auto cm = eval::confuse(eval::load_predictions(prediction_files[i]), gold);
    const auto m = eval::metrics(cm);
    rows.push_back({names[i], m});
    json run;
    run["name"] = names[i];
    run["confusion"] = eval::to_json(cm);
    run["metrics"] = eval::to_json(m);
    if (i > 0) {
      run["relative_improvement_pct"] = eval::relative_improvement(100.0 * m.accuracy, 100.0 * rows.front().metrics.accuracy);
      run["relative_to"] = names.front();
    }
    runs.push_back(std::move(run));
  }
  json out;
  out["primary_f1"] = "macro";
  out["runs"] = std::move(runs);
  return {out.dump(2) + "\n", eval::render_report(rows, order), eval::render_csv(rows, order)};
}

// ---- subcommand runners ----------------------------------------------------------

void require_file(const std::string& path, const char* flag) {
  if (!fs::exists(path)) throw Error(ErrorCode::UnreadableFile, std::string(flag) + " " + path + " does not exist");
}

void run_parse(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  io::write_file_atomic(cfg.output, stage_parse(cfg.input, cfg.speaker));
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_analyze(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  io::write_file_atomic(cfg.output, stage_analyze(cfg.input, load_lexicon(cfg)));
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_prompt(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  io::write_file_atomic(cfg.output, stage_prompt(cfg, cfg.input));
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_classify(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  const auto out = stage_classify(cfg, cfg.input);
  io::write_file_atomic(cfg.output, out.predictions);
  fs::path log = cfg.completions;
  if (log.empty()) {
    log = cfg.output;
    log += ".completions.jsonl";
  }
  io::write_file_atomic(log, out.completions);
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_baseline(const RunConfig& cfg, const BaselineOptions& opt) {
  require_file(cfg.input, "--input");
  require_file(cfg.manifest, "--manifest");
  const auto analysis = read_analysis(cfg.input);
  const auto gold = corpus::load_manifest(cfg.manifest);
  const auto& names = cues::FeatureVector::names();

  baseline::Matrix train_x;
  std::vector<Label> train_y;
  for (const auto* r : gold.in_split(Split::Train)) {
    const auto it = analysis.find(r->participant_id);
    if (it == analysis.end()) throw Error(ErrorCode::MalformedRecord, "no features for " + r->participant_id);
    train_x.push_back(it->second.features.values());
    train_y.push_back(r->label);
  }

  std::optional<baseline::Standardizer> standardizer;
  std::optional<baseline::LdaModel> lda;
  std::optional<baseline::LogisticModel> logistic;
  if (!opt.model_in.empty()) {
    const auto j = nlohmann::json::parse(io::read_text_file(opt.model_in));
    if (opt.model == "lda") {
      auto loaded = baseline::lda_from_json(j, names);
      lda = std::move(loaded.model);
      standardizer = std::move(loaded.standardizer);
    } else {
      auto loaded = baseline::logistic_from_json(j, names);
      logistic = std::move(loaded.model);
      standardizer = std::move(loaded.standardizer);
    }
  } else {
    if (!opt.no_standardize) {
      standardizer = baseline::Standardizer::fit(train_x);
      train_x = standardizer->apply(train_x);
    }
    if (opt.model == "lda") {
      lda = baseline::fit_lda(train_x, train_y, names);
    } else if (opt.model == "logistic") {
      logistic = baseline::fit_logistic(train_x, train_y, {opt.lr, opt.epochs, opt.l2}, names);
    } else {
      throw Error(ErrorCode::InvalidConfig, "--model must be lda or logistic");
    }
  }
  const baseline::Standardizer* sp = standardizer ? &*standardizer : nullptr;
  if (!opt.model_out.empty()) {
    const auto j = lda ? baseline::to_json(*lda, sp) : baseline::to_json(*logistic, sp);
    io::write_file_atomic(opt.model_out, j.dump(2) + "\n");
  }

  std::vector<Prediction> predictions;
  for (const auto* r : gold.in_split(Split::Test)) {
    const auto it = analysis.find(r->participant_id);
    if (it == analysis.end()) throw Error(ErrorCode::MalformedRecord, "no features for " + r->participant_id);
    auto x = it->second.features.values();
    if (sp) x = sp->apply(x);
    predictions.push_back(lda ? baseline::predict(*lda, x, r->participant_id)
                              : baseline::predict(*logistic, x, r->participant_id));
  }
  std::sort(predictions.begin(), predictions.end(),
            [](const Prediction& a, const Prediction& b) { return a.participant_id < b.participant_id; });
  io::write_file_atomic(cfg.output, eval::predictions_jsonl(predictions));
  write_run_manifest(run_manifest_for_file(cfg.output), cfg, {{"baseline_model", opt.model}});
}

void run_synth(const RunConfig& cfg, const synth::SynthConfig& sc) {
  auto generated = synth::generate(sc);
  if (!cfg.split_policy.empty()) {
    const auto policy = corpus::parse_split_policy(cfg.split_policy, cfg.seed);
    if (!policy) throw Error(ErrorCode::InvalidConfig, "--split-policy must look like TRAIN:TEST[:flat]");
    generated.corpus = corpus::split(generated.corpus, *policy);
  }
  synth::write(generated, cfg.output);
  write_run_manifest(fs::path(cfg.output) / "run_manifest.json", cfg, {{"synth", synth::to_json(sc)}});
}

void run_eval(const RunConfig& cfg, const EvalOptions& opt) {
  require_file(cfg.manifest, "--manifest");
  for (const auto& p : opt.predictions) require_file(p, "--predictions");
  const auto gold = corpus::load_manifest(cfg.manifest);
  const auto out = stage_eval(opt.predictions, opt.names, opt.order, gold);
  io::write_file_atomic(cfg.output, out.metrics);
  if (!opt.report.empty()) io::write_file_atomic(opt.report, out.report);
  if (!opt.csv.empty()) io::write_file_atomic(opt.csv, out.csv);
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_validate(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.input, "--input");
  const auto corpus = corpus::load_manifest(cfg.input);
  const auto report = corpus::validate(corpus, fs::path(cfg.input).parent_path());
  const std::string text = corpus::to_json(report).dump(2) + "\n";
  if (cfg.output.empty()) {
    out << text;
  } else {
    io::write_file_atomic(cfg.output, text);
  }
}

void run_split(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  const auto policy = corpus::parse_split_policy(cfg.split_policy, cfg.seed);
  if (!policy) throw Error(ErrorCode::InvalidConfig, "--split-policy must look like TRAIN:TEST[:flat]");
  const auto split = corpus::split(corpus::load_manifest(cfg.input), *policy);
  io::write_file_atomic(cfg.output, corpus::manifest_jsonl(split));
  fs::path tsv = cfg.output;
  tsv.replace_extension(".tsv");
  io::write_file_atomic(tsv, corpus::split_tsv(split));
  write_run_manifest(run_manifest_for_file(cfg.output), cfg);
}

void run_pipeline(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);

  // Rebase transcript paths so the stage files work from the output directory.
  auto corpus = corpus::load_manifest(cfg.input);
  const fs::path manifest_dir = fs::absolute(fs::path(cfg.input)).parent_path();
  for (auto& r : corpus.records) {
    fs::path p = r.transcript_path;
    if (p.is_relative()) r.transcript_path = (manifest_dir / p).lexically_normal().string();
  }
  if (!cfg.split_policy.empty()) {
    const auto policy = corpus::parse_split_policy(cfg.split_policy, cfg.seed);
    if (!policy) throw Error(ErrorCode::InvalidConfig, "--split-policy must look like TRAIN:TEST[:flat]");
    corpus = corpus::split(corpus, *policy);
  }
  if (corpus.in_split(Split::Test).empty()) {
    throw Error(ErrorCode::InfeasiblePolicy, "manifest has no test split; pass --split-policy");
  }
  const fs::path manifest = dir / "manifest.jsonl";
  io::write_file_atomic(manifest, corpus::manifest_jsonl(corpus));
  io::write_file_atomic(dir / "split.tsv", corpus::split_tsv(corpus));

  io::write_file_atomic(dir / "transcripts.jsonl", stage_parse(manifest, cfg.speaker));
  io::write_file_atomic(dir / "analysis.jsonl", stage_analyze(dir / "transcripts.jsonl", load_lexicon(cfg)));

  RunConfig staged = cfg;
  staged.manifest = manifest.string();
  staged.analysis = (dir / "analysis.jsonl").string();
  io::write_file_atomic(dir / "bundles.jsonl", stage_prompt(staged, dir / "transcripts.jsonl"));

  const auto classified = stage_classify(cfg, dir / "bundles.jsonl");
  io::write_file_atomic(dir / "predictions.jsonl", classified.predictions);
  io::write_file_atomic(dir / "completions.jsonl", classified.completions);

  const auto evaluated = stage_eval({(dir / "predictions.jsonl").string()}, {cfg.mode}, {}, corpus);
  io::write_file_atomic(dir / "metrics.json", evaluated.metrics);
  io::write_file_atomic(dir / "report.txt", evaluated.report);
  io::write_file_atomic(dir / "report.csv", evaluated.csv);
  write_run_manifest(dir / "run_manifest.json", cfg);
}

void run_mock_server(const RunConfig& cfg, int port, const std::string& host, std::ostream& out) {
  gateway::MockServerOptions opt;
  opt.rule.threshold = cfg.threshold;
  opt.port = port;
  opt.host = host;
  gateway::MockServer server(opt);
  out << "mock endpoint listening on http://" << host << ":" << port << "/v1/chat/completions" << std::endl;
  server.run_blocking();
}

bool is_endpoint_error(ErrorCode code) {
  return code == ErrorCode::Unreachable || code == ErrorCode::Unparseable || code == ErrorCode::AuthFailure ||
         code == ErrorCode::EndpointRejected;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cuescreen: cue-coverage screening pipeline for CHAT picture descriptions", "cuescreen"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kLibraryVersion));

  RunConfig cfg;
  BaselineOptions bopt;
  EvalOptions eopt;
  synth::SynthConfig sc;
  int server_port = 8080;
  std::string server_host = "127.0.0.1";

  auto add_io = [&](CLI::App* sub, bool input_required, bool output_required) {
    auto* i = sub->add_option("--input", cfg.input, "Input path");
    auto* o = sub->add_option("--output", cfg.output, "Output path");
    if (input_required) i->required();
    if (output_required) o->required();
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str(); };
  auto add_templates = [&](CLI::App* sub) {
    sub->add_option("--templates", cfg.templates, "Template directory (default: built-in)")->check(CLI::ExistingDirectory);
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", cfg.mode, "Prompt mode")
        ->check(CLI::IsMember({"zero_shot", "few_shot", "cot"}))
        ->capture_default_str();
  };
  auto add_endpoint = [&](CLI::App* sub) {
    sub->add_option("--endpoint", cfg.endpoint, "mock or external")
        ->check(CLI::IsMember({"mock", "external"}))
        ->capture_default_str();
    sub->add_option("--base-url", cfg.base_url, "Chat endpoint base URL")->capture_default_str();
    sub->add_option("--model", cfg.model, "Served model name")->capture_default_str();
    sub->add_option("--api-key-env", cfg.api_key_env, "Environment variable holding the credential")
        ->capture_default_str();
    sub->add_option("--threshold", cfg.threshold, "Mock rule: AD iff cue proportion < threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--max-retries", cfg.max_retries, "Retries after the first attempt")->capture_default_str();
    sub->add_option("--timeout", cfg.timeout, "Request timeout in seconds")->capture_default_str();
    sub->add_option("--concurrency", cfg.concurrency, "Requests in flight")->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* parse = app.add_subcommand("parse", "CHAT files -> transcripts JSONL");
  add_io(parse, true, true);
  parse->add_option("--speaker", cfg.speaker, "Speaker tier to keep")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "transcripts JSONL -> cue/feature JSONL");
  add_io(analyze, true, true);
  analyze->add_option("--lexicon", cfg.lexicon, "Lexicon file (default: built-in)")->check(CLI::ExistingFile);

  auto* prompt_cmd = app.add_subcommand("prompt", "transcripts JSONL -> prompt bundles JSONL");
  add_io(prompt_cmd, true, true);
  add_mode(prompt_cmd);
  add_seed(prompt_cmd);
  add_templates(prompt_cmd);
  prompt_cmd->add_option("--analysis", cfg.analysis, "Analysis JSONL (required for cot)");
  prompt_cmd->add_option("--manifest", cfg.manifest, "Manifest JSONL (required for few_shot)");

  auto* classify = app.add_subcommand("classify", "prompt bundles -> predictions via the gateway");
  add_io(classify, true, true);
  add_endpoint(classify);
  add_seed(classify);
  classify->add_option("--completions", cfg.completions, "Completion log path");

  auto* base = app.add_subcommand("baseline", "fit/predict native LDA or logistic models");
  add_io(base, true, true);
  base->add_option("--manifest", cfg.manifest, "Manifest JSONL with splits")->required();
  base->add_option("--model", bopt.model, "lda or logistic")->check(CLI::IsMember({"lda", "logistic"}))->capture_default_str();
  base->add_option("--model-out", bopt.model_out, "Write the fitted model JSON here");
  base->add_option("--model-in", bopt.model_in, "Load a fitted model instead of training")->check(CLI::ExistingFile);
  base->add_option("--lr", bopt.lr, "Logistic learning rate")->capture_default_str();
  base->add_option("--epochs", bopt.epochs, "Logistic epochs")->capture_default_str();
  base->add_option("--l2", bopt.l2, "Logistic L2 penalty")->capture_default_str();
  base->add_flag("--no-standardize", bopt.no_standardize, "Skip z-scoring features");
  add_seed(base);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--output", cfg.output, "Output directory")->required();
  synth_cmd->add_option("--n", sc.n_per_class, "Participants per class")->capture_default_str();
  synth_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--p-cue-ad", sc.p_cue_ad, "Per-lemma cue probability, AD")->capture_default_str();
  synth_cmd->add_option("--p-cue-non-ad", sc.p_cue_non_ad, "Per-lemma cue probability, non-AD")->capture_default_str();
  synth_cmd->add_option("--disfluency-ad", sc.disfluency_rate_ad, "Markers per 10 tokens, AD")->capture_default_str();
  synth_cmd->add_option("--disfluency-non-ad", sc.disfluency_rate_non_ad, "Markers per 10 tokens, non-AD")
      ->capture_default_str();
  synth_cmd->add_option("--mean-tokens", sc.mean_tokens, "Mean filler tokens per transcript")->capture_default_str();
  synth_cmd->add_option("--split-policy", cfg.split_policy, "TRAIN:TEST[:flat]");

  auto* eval_cmd = app.add_subcommand("eval", "predictions + manifest -> metrics/report");
  eval_cmd->add_option("--predictions", eopt.predictions, "Predictions JSONL (repeatable)")->required();
  eval_cmd->add_option("--name", eopt.names, "Row name per --predictions");
  eval_cmd->add_option("--manifest", cfg.manifest, "Manifest JSONL with splits")->required();
  eval_cmd->add_option("--output", cfg.output, "Metrics JSON path")->required();
  eval_cmd->add_option("--report", eopt.report, "Text table path");
  eval_cmd->add_option("--csv", eopt.csv, "CSV table path");
  eval_cmd->add_option("--order", eopt.order, "Row order for the report");

  auto* pipeline = app.add_subcommand("pipeline", "parse -> analyze -> prompt -> classify -> eval");
  add_io(pipeline, true, true);
  add_mode(pipeline);
  add_seed(pipeline);
  add_templates(pipeline);
  add_endpoint(pipeline);
  pipeline->add_option("--split-policy", cfg.split_policy, "TRAIN:TEST[:flat]");
  pipeline->add_option("--speaker", cfg.speaker, "Speaker tier to keep")->capture_default_str();
  pipeline->add_option("--lexicon", cfg.lexicon, "Lexicon file")->check(CLI::ExistingFile);

  auto* validate_cmd = app.add_subcommand("validate", "report on a manifest");
  add_io(validate_cmd, true, false);

  auto* split_cmd = app.add_subcommand("split", "assign train/test splits to a manifest");
  add_io(split_cmd, true, true);
  split_cmd->add_option("--split-policy", cfg.split_policy, "TRAIN:TEST[:flat]")->required();
  add_seed(split_cmd);

  auto* server = app.add_subcommand("mock-server", "serve the mock model over HTTP");
  server->add_option("--port", server_port, "Port")->capture_default_str();
  server->add_option("--host", server_host, "Bind address")->capture_default_str();
  server->add_option("--threshold", cfg.threshold, "AD iff cue proportion < threshold")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kLibraryVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitInputError;
  }

  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    const std::string& s = cfg.subcommand;
    if (s == "parse") run_parse(cfg);
    else if (s == "analyze") run_analyze(cfg);
    else if (s == "prompt") run_prompt(cfg);
    else if (s == "classify") run_classify(cfg);
    else if (s == "baseline") run_baseline(cfg, bopt);
    else if (s == "synth") { sc.seed = cfg.seed; run_synth(cfg, sc); }
    else if (s == "eval") run_eval(cfg, eopt);
    else if (s == "pipeline") run_pipeline(cfg);
    else if (s == "validate") run_validate(cfg, out);
    else if (s == "split") run_split(cfg);
    else if (s == "mock-server") run_mock_server(cfg, server_port, server_host, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_endpoint_error(e.code()) ? kExitEndpointError : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace cuescreen::cli
