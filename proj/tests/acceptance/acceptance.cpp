// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "cuescreen/baseline.hpp"
#include "cuescreen/chat_parser.hpp"
#include "cuescreen/corpus.hpp"
#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/evaluator.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/random.hpp"
#include "cuescreen/synth.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace cuescreen;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// ---- parser suite ------------------------------------------------------------

bool clean_is_faithful(const chat::TranscriptDocument& doc, const chat::CleanTranscript& clean) {
  std::string raw;
  for (const auto& u : doc.utterances) {
    if (u.speaker_code == "PAR") raw += lower(u.raw_text) + " ";
  }
  std::istringstream in(clean.text);
  std::string tok;
  std::size_t pos = 0;
  while (in >> tok) {
    const auto found = raw.find(lower(tok), pos);
    if (found == std::string::npos) return false;
    pos = found + tok.size();
  }
  const auto again = chat::strip_annotations(clean.text, chat::annotate(clean.text));
  if (again.clean != clean.text) return false;
  for (auto c : again.consumed) {
    if (c != 0) return false;
  }
  return true;
}

Outcome parser_suite() {
  const auto t0 = Clock::now();
  const fs::path root = testing::fixtures() / "cha";
  std::size_t valid = 0, malformed = 0, bad = 0;
  for (const auto& e : fs::directory_iterator(root / "valid")) {
    if (e.path().extension() != ".cha") continue;
    ++valid;
    try {
      const auto doc = chat::parse_document(io::read_text_file(e.path()), e.path().stem().string());
      if (!clean_is_faithful(doc, chat::extract_participant_text(doc))) ++bad;
    } catch (const Error&) {
      ++bad;
    }
  }
  std::map<std::string, std::pair<std::string, std::size_t>> expected;
  const auto lines = io::split_lines(io::read_text_file(root / "malformed" / "expected.tsv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream in(lines[i]);
    std::string file, code;
    std::size_t line = 0;
    if (in >> file >> code >> line) expected[file] = {code, line};
  }
  for (const auto& e : fs::directory_iterator(root / "malformed")) {
    if (e.path().extension() != ".cha") continue;
    ++malformed;
    const auto it = expected.find(e.path().filename().string());
    try {
      chat::extract_participant_text(chat::parse_document(io::read_text_file(e.path())));
      ++bad;
    } catch (const Error& err) {
      if (it == expected.end() || to_string(err.code()) != it->second.first || err.line() != it->second.second) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = valid + malformed >= 20 && malformed > 0 && bad == 0 && secs < 1.0;
  return {pass, std::to_string(valid) + " valid + " + std::to_string(malformed) + " malformed fixtures, " +
                    std::to_string(bad) + " mismatches, " + fmt("%.3f s (limit 1 s)", secs)};
}

// ---- cue oracle --------------------------------------------------------------

Outcome cue_oracle() {
  synth::SynthConfig cfg;
  cfg.n_per_class = 500;
  cfg.p_cue_ad = 0.4;
  cfg.p_cue_non_ad = 0.7;
  cfg.seed = 2718;
  const auto corpus = synth::generate(cfg);
  const auto t0 = Clock::now();
  const auto& lex = cues::CueLexicon::standard();
  std::size_t mismatches = 0;
  for (const auto& f : corpus.files) {
    const auto clean = chat::extract_participant_text(chat::parse_document(f.content, f.name));
    const auto tokens = cues::tokenize(clean.text);
    const auto got = cues::cue_coverage(tokens, lex);
    const auto want = oracle::brute_force_cues(tokens, lex);
    bool ok = std::set<std::string>(got.matched.begin(), got.matched.end()) == want.matched &&
              got.proportion() == static_cast<double>(want.matched.size()) / 12.0;
    for (std::size_t k = 0; k < lex.size(); ++k) ok = ok && got.per_lemma_counts[k] == want.counts.at(lex.entries()[k].lemma);
    mismatches += ok ? 0 : 1;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && corpus.files.size() == 1000 && secs < 1.0,
          std::to_string(corpus.files.size()) + " transcripts, " + std::to_string(mismatches) + " mismatches, " +
              fmt("%.3f s (limit 1 s)", secs)};
}

// ---- generator round trip ----------------------------------------------------

Outcome generator_round_trip() {
  synth::SynthConfig cfg;  // n = 50 per class, p_AD 0.35, p_nonAD 0.80, seed 1
  const auto corpus = synth::generate(cfg);
  std::size_t set_mismatches = 0;
  std::map<std::pair<Label, std::string>, std::size_t> included;
  for (std::size_t i = 0; i < corpus.files.size(); ++i) {
    const auto& truth = corpus.truth[i];
    const auto clean = chat::extract_participant_text(chat::parse_document(corpus.files[i].content, truth.participant_id));
    const auto got = cues::cue_coverage(cues::tokenize(clean.text));
    if (got.matched != truth.injected_lemmas) ++set_mismatches;
    for (const auto& lemma : got.matched) ++included[{truth.label, lemma}];
  }
  double worst_z = 0.0;
  std::string worst;
  for (const auto label : {Label::AD, Label::NonAD}) {
    const double p = label == Label::AD ? cfg.p_cue_ad : cfg.p_cue_non_ad;
    const double n = static_cast<double>(cfg.n_per_class);
    for (const auto& e : cues::CueLexicon::standard().entries()) {
      const double phat = static_cast<double>(included[{label, e.lemma}]) / n;
      const double z = std::abs(phat - p) / std::sqrt(p * (1.0 - p) / n);
      if (z > worst_z) {
        worst_z = z;
        worst = std::string(to_string(label)) + "/" + e.lemma;
      }
    }
  }
  return {corpus.files.size() == 100 && set_mismatches == 0 && worst_z <= 3.0,
          std::to_string(corpus.files.size()) + " participants, " + std::to_string(set_mismatches) +
              " lemma-set mismatches, max per-lemma deviation " + fmt("%.2f sigma", worst_z) + " (" + worst +
              ", limit 3)"};
}

// ---- metrics ------------------------------------------------------------------

Outcome metrics_brute_force() {
  std::size_t matrices = 0;
  double worst = 0.0;
  for (std::size_t tp = 0; tp <= 8; ++tp)
    for (std::size_t fp = 0; tp + fp <= 8; ++fp)
      for (std::size_t fn = 0; tp + fp + fn <= 8; ++fn)
        for (std::size_t tn = 0; tp + fp + fn + tn <= 8; ++tn) {
          if (tp + fp + fn + tn == 0) continue;
          ++matrices;
          const auto g = eval::metrics({tp, fp, fn, tn});
          const auto w = oracle::definitional(tp, fp, fn, tn);
          for (const double d : {g.accuracy - w.accuracy, g.precision_pos - w.precision_pos,
                                 g.recall_pos - w.recall_pos, g.f1_pos - w.f1_pos, g.precision_neg - w.precision_neg,
                                 g.recall_neg - w.recall_neg, g.f1_neg - w.f1_neg, g.macro_f1 - w.macro_f1}) {
            worst = std::max(worst, std::abs(d));
          }
        }
  Rng rng(1000);
  double worst_swap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    eval::ConfusionMatrix cm{rng.below(50), rng.below(50), rng.below(50), rng.below(50) + 1};
    const auto a = eval::metrics(cm);
    const auto b = eval::metrics(cm.swapped());
    for (const double d : {a.f1_pos - b.f1_neg, a.f1_neg - b.f1_pos, a.accuracy - b.accuracy, a.macro_f1 - b.macro_f1}) {
      worst_swap = std::max(worst_swap, std::abs(d));
    }
  }
  return {matrices == 494 && worst <= 1e-12 && worst_swap <= 1e-12,
          std::to_string(matrices) + " matrices, max oracle diff " + fmt("%.1e", worst) +
              ", 1000 swaps max diff " + fmt("%.1e", worst_swap) + " (limit 1e-12)"};
}

Outcome improvement_and_report() {
  const double a = eval::relative_improvement(83.33, 75.00);
  const double b = eval::relative_improvement(87.5, 75.0);
  const fs::path dir = testing::fixtures() / "method_runs";
  const auto gold = corpus::load_manifest(dir / "manifest.jsonl");
  auto render = [&] {
    std::vector<eval::ReportRow> rows;
    for (const auto& [file, name] : std::vector<std::pair<std::string, std::string>>{
             {"baseline", "Baseline"}, {"zero_shot", "Zero-shot"}, {"few_shot", "Few-shot"}, {"cot", "CoT"}}) {
      rows.push_back({name, eval::metrics(eval::confuse(eval::load_predictions(dir / (file + ".jsonl")), gold))});
    }
    return eval::render_report(rows);
  };
  const auto first = render();
  const bool replay = first == render() && first == io::read_text_file(dir / "expected_report.txt");
  return {std::abs(a - 11.1) < 1e-9 && std::abs(b - 16.7) < 1e-9 && replay,
          "relative improvements " + fmt("%.1f%%", a) + " and " + fmt("%.1f%%", b) + " (want 11.1%, 16.7%); report replay " +
              (replay ? "byte-identical" : "differs")};
}

// ---- LDA ----------------------------------------------------------------------

Outcome lda_statistical() {
  const auto t0 = Clock::now();
  auto draw = [](std::size_t n, std::uint64_t seed, baseline::Matrix& x, std::vector<Label>& y) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      const bool ad = i % 2 == 0;
      x.push_back({rng.normal() + (ad ? 2.0 : 0.0)});
      y.push_back(ad ? Label::AD : Label::NonAD);
    }
  };
  baseline::Matrix xtr, xte;
  std::vector<Label> ytr, yte;
  draw(10000, 11, xtr, ytr);
  draw(10000, 12, xte, yte);
  const auto model = baseline::fit_lda(xtr, ytr);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < xte.size(); ++i) ok += baseline::predict(model, xte[i]).label == yte[i];
  const double acc = static_cast<double>(ok) / static_cast<double>(xte.size());
  const double bayes = oracle::phi(1.0);
  const double secs = seconds_since(t0);
  return {std::abs(acc - bayes) <= 0.02 && secs < 5.0,
          "test accuracy " + fmt("%.2f%%", 100 * acc) + " vs Bayes optimum " + fmt("%.2f%%", 100 * bayes) +
              " (limit +/-2 pp), " + fmt("%.3f s (limit 5 s)", secs)};
}

Outcome logistic_gradient() {
  double worst = 0.0;
  for (std::uint64_t problem = 0; problem < 20; ++problem) {
    Rng rng(500 + problem);
    const std::size_t dim = 5;
    const std::size_t n = 10 + rng.below(40);
    baseline::Matrix x(n, std::vector<double>(dim));
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = rng.normal();
      y[i] = rng.bernoulli(0.5) ? Label::AD : Label::NonAD;
    }
    std::vector<double> w(dim);
    for (auto& v : w) v = rng.normal();
    const double b = rng.normal();
    const double l2 = rng.uniform() * 0.1;
    const auto g = baseline::logistic_gradient(w, b, x, y, l2);
    const double h = 1e-5;
    for (std::size_t k = 0; k <= dim; ++k) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (k < dim) {
        wp[k] += h;
        wm[k] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd =
          (baseline::logistic_loss(wp, bp, x, y, l2) - baseline::logistic_loss(wm, bm, x, y, l2)) / (2.0 * h);
      const double rel = std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-5, "20 problems, max relative error " + fmt("%.2e", worst) + " (limit 1e-5)"};
}

// ---- end to end ----------------------------------------------------------------

Outcome end_to_end_mock() {
  testing::TempDir dir("cuescreen-accept");
  const auto corpus_dir = dir / "corpus";
  const auto out_dir = dir / "run";
  std::ostringstream sink;
  const auto t0 = Clock::now();
  if (cli::dispatch({"synth", "--n", "50", "--seed", "1", "--split-policy", "0:100", "--output", corpus_dir.string()},
                    sink, sink) != 0 ||
      cli::dispatch({"pipeline", "--input", (corpus_dir / "manifest.jsonl").string(), "--output", out_dir.string(),
                     "--endpoint", "mock", "--mode", "cot"},
                    sink, sink) != 0) {
    return {false, "pipeline failed: " + sink.str()};
  }
  const double secs = seconds_since(t0);

  std::map<std::string, Label> rule;
  std::size_t rule_correct = 0;
  for (const auto& [line, j] : io::read_jsonl(corpus_dir / "truth.jsonl")) {
    const auto t = synth::truth_from_json(j);
    const Label l = static_cast<double>(t.injected_lemmas.size()) / 12.0 < 0.5 ? Label::AD : Label::NonAD;
    rule[t.participant_id] = l;
    rule_correct += l == t.label;
  }
  const double rule_acc = static_cast<double>(rule_correct) / static_cast<double>(rule.size());
  std::size_t disagreements = 0;
  const auto preds = eval::load_predictions(out_dir / "predictions.jsonl");
  for (const auto& p : preds) disagreements += rule.at(p.participant_id) != p.label;
  std::size_t unparseable = 0;
  for (const auto& [line, j] : io::read_jsonl(out_dir / "completions.jsonl")) {
    if (j["parsed"].is_null() || j["attempt_count"] != 1) ++unparseable;
  }
  const auto metrics = nlohmann::json::parse(io::read_text_file(out_dir / "metrics.json"));
  const double acc = metrics["runs"][0]["metrics"]["accuracy"].get<double>();
  const bool pass = preds.size() == 100 && acc == rule_acc && disagreements == 0 && unparseable == 0 && secs < 10.0;
  return {pass, std::to_string(preds.size()) + " participants, pipeline accuracy " + fmt("%.4f", acc) +
                    " vs truth-log rule " + fmt("%.4f", rule_acc) + ", " + std::to_string(disagreements) +
                    " per-participant disagreements, " + std::to_string(unparseable) + " unparseable, " +
                    fmt("%.2f s (limit 10 s)", secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"parser_suite", parser_suite},
      {"cue_oracle", cue_oracle},
      {"generator_round_trip", generator_round_trip},
      {"metrics_brute_force", metrics_brute_force},
      {"improvement_and_report", improvement_and_report},
      {"lda_statistical", lda_statistical},
      {"logistic_gradient", logistic_gradient},
      {"end_to_end_mock", end_to_end_mock},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
