#include "cuescreen/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"

namespace cuescreen::eval {

ConfusionMatrix confuse(const std::vector<Prediction>& predictions, const corpus::Corpus& gold) {
  std::map<std::string, Label> test;
  for (const auto& r : gold.records) {
    if (r.split == Split::Test) test.emplace(r.participant_id, r.label);
  }
  ConfusionMatrix cm;
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    const auto it = test.find(p.participant_id);
    if (it == test.end()) {
      const bool known = gold.find(p.participant_id) != nullptr;
      throw Error(ErrorCode::UnknownParticipant,
                  p.participant_id + (known ? " is not in the test split" : " is not in the corpus"));
    }
    if (!seen.insert(p.participant_id).second) {
      throw Error(ErrorCode::DuplicatePrediction, p.participant_id);
    }
    const bool gold_ad = it->second == Label::AD;
    const bool pred_ad = p.label == Label::AD;
    if (gold_ad && pred_ad) ++cm.tp;
    if (!gold_ad && pred_ad) ++cm.fp;
    if (gold_ad && !pred_ad) ++cm.fn;
    if (!gold_ad && !pred_ad) ++cm.tn;
  }
  std::string missing;
  for (const auto& [id, _] : test) {
    if (!seen.count(id)) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingPrediction, missing);
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyMatrix, "no predictions to score");
  const auto tp = static_cast<double>(cm.tp);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  const auto tn = static_cast<double>(cm.tn);
  const double total = static_cast<double>(cm.total());
  Metrics m;
  m.support = cm.total();
  m.accuracy = (tp + tn) / total;
  m.precision_pos = ratio(tp, tp + fp);
  m.recall_pos = ratio(tp, tp + fn);
  m.f1_pos = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  m.precision_neg = ratio(tn, tn + fn);
  m.recall_neg = ratio(tn, tn + fp);
  m.f1_neg = ratio(2.0 * tn, 2.0 * tn + fn + fp);
  m.macro_f1 = (m.f1_pos + m.f1_neg) / 2.0;
  m.weighted_f1 = ((tp + fn) * m.f1_pos + (tn + fp) * m.f1_neg) / total;
  return m;
}

double relative_improvement(double candidate_acc, double baseline_acc) {
  if (!(baseline_acc > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline accuracy must be > 0");
  const double percent = 100.0 * (candidate_acc - baseline_acc) / baseline_acc;
  return std::round(percent * 10.0) / 10.0;
}

namespace {

std::vector<const ReportRow*> ordered(const std::vector<ReportRow>& rows, const std::vector<std::string>& order) {
  if (rows.empty()) throw Error(ErrorCode::EmptyReport, "report needs at least one row");
  std::vector<const ReportRow*> out;
  std::vector<bool> used(rows.size(), false);
  for (const auto& name : order) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!used[i] && rows[i].name == name) {
        out.push_back(&rows[i]);
        used[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!used[i]) out.push_back(&rows[i]);
  }
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_report(const std::vector<ReportRow>& rows, const std::vector<std::string>& order) {
  const auto sorted = ordered(rows, order);
  const std::string h_method = "Method";
  const std::string h_acc = "Acc (%)";
  const std::string h_f1 = "F1 (%)";
  std::size_t w_name = h_method.size();
  for (const auto* r : sorted) w_name = std::max(w_name, r->name.size());

  std::string out;
  out += pad_right(h_method, w_name) + " | " + h_acc + " | " + h_f1 + "\n";
  out += std::string(w_name, '-') + "-+-" + std::string(h_acc.size(), '-') + "-+-" + std::string(h_f1.size(), '-') + "\n";
  for (const auto* r : sorted) {
    out += pad_right(r->name, w_name) + " | " + pad_left(percent(r->metrics.accuracy), h_acc.size()) + " | " +
           pad_left(percent(r->metrics.macro_f1), h_f1.size()) + "\n";
  }
  return out;
}

std::string render_csv(const std::vector<ReportRow>& rows, const std::vector<std::string>& order) {
  std::string out = "method,accuracy_pct,macro_f1_pct,f1_pos_pct,weighted_f1_pct,support\n";
  for (const auto* r : ordered(rows, order)) {
    out += r->name + "," + percent(r->metrics.accuracy) + "," + percent(r->metrics.macro_f1) + "," +
           percent(r->metrics.f1_pos) + "," + percent(r->metrics.weighted_f1) + "," +
           std::to_string(r->metrics.support) + "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

nlohmann::ordered_json to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision_pos"] = m.precision_pos;
  j["recall_pos"] = m.recall_pos;
  j["f1_pos"] = m.f1_pos;
  j["precision_neg"] = m.precision_neg;
  j["recall_neg"] = m.recall_neg;
  j["f1_neg"] = m.f1_neg;
  j["macro_f1"] = m.macro_f1;
  j["weighted_f1"] = m.weighted_f1;
  j["support"] = m.support;
  return j;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  for (const auto& [line, value] : io::read_jsonl(path)) {
    try {
      out.push_back(prediction_from_json(value));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.detail(), line);
    }
  }
  return out;
}

std::string predictions_jsonl(const std::vector<Prediction>& predictions) {
  return io::to_jsonl(predictions, [](const Prediction& p) { return to_json(p); });
}

}  // namespace cuescreen::eval
