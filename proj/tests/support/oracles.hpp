#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. None of these call into the library's own algorithms.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/evaluator.hpp"

namespace oracle {

struct CueTruth {
  std::set<std::string> matched;
  std::map<std::string, std::size_t> counts;
};

// Nested loops over every (lemma, variant, token) triple.
inline CueTruth brute_force_cues(const std::vector<std::string>& tokens, const cuescreen::cues::CueLexicon& lexicon) {
  CueTruth t;
  for (const auto& entry : lexicon.entries()) {
    std::size_t hits = 0;
    for (const auto& tok : tokens) {
      for (const auto& v : entry.variants) {
        if (tok == v) ++hits;
      }
    }
    t.counts[entry.lemma] = hits;
    if (hits > 0) t.matched.insert(entry.lemma);
  }
  return t;
}

struct DefMetrics {
  double accuracy, precision_pos, recall_pos, f1_pos, precision_neg, recall_neg, f1_neg, macro_f1;
};

inline double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

// Precision/recall first, F1 as their harmonic mean.
inline DefMetrics definitional(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  auto safe = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  DefMetrics m{};
  const double n = double(tp + fp + fn + tn);
  m.accuracy = double(tp + tn) / n;
  m.precision_pos = safe(double(tp), double(tp + fp));
  m.recall_pos = safe(double(tp), double(tp + fn));
  m.f1_pos = harmonic(m.precision_pos, m.recall_pos);
  m.precision_neg = safe(double(tn), double(tn + fn));
  m.recall_neg = safe(double(tn), double(tn + fp));
  m.f1_neg = harmonic(m.precision_neg, m.recall_neg);
  m.macro_f1 = (m.f1_pos + m.f1_neg) / 2.0;
  return m;
}

// Textbook two-class LDA in two dimensions with an explicit 2x2 inverse.
// Same ridge convention as the library: 1e-6 * trace / dim.
struct Lda2 {
  std::array<double, 2> mu_a{}, mu_n{};
  std::array<double, 4> inv{};
  double log_prior_ratio = 0.0;

  double score(double x, double y) const {
    auto quad = [&](const std::array<double, 2>& m, double px, double py) {
      return px * (inv[0] * m[0] + inv[1] * m[1]) + py * (inv[2] * m[0] + inv[3] * m[1]);
    };
    const double da = quad(mu_a, x, y) - 0.5 * quad(mu_a, mu_a[0], mu_a[1]);
    const double dn = quad(mu_n, x, y) - 0.5 * quad(mu_n, mu_n[0], mu_n[1]);
    return da - dn + log_prior_ratio;
  }
};

inline Lda2 fit_lda2(const std::vector<std::array<double, 2>>& pts, const std::vector<bool>& is_ad) {
  Lda2 m;
  double na = 0, nn = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& mu = is_ad[i] ? m.mu_a : m.mu_n;
    mu[0] += pts[i][0];
    mu[1] += pts[i][1];
    (is_ad[i] ? na : nn) += 1;
  }
  for (int k = 0; k < 2; ++k) {
    m.mu_a[k] /= na;
    m.mu_n[k] /= nn;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& mu = is_ad[i] ? m.mu_a : m.mu_n;
    const double dx = pts[i][0] - mu[0], dy = pts[i][1] - mu[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double dof = double(pts.size()) - 2.0;
  sxx /= dof;
  sxy /= dof;
  syy /= dof;
  const double ridge = 1e-6 * (sxx + syy) / 2.0;
  sxx += ridge;
  syy += ridge;
  const double det = sxx * syy - sxy * sxy;
  m.inv = {syy / det, -sxy / det, -sxy / det, sxx / det};
  m.log_prior_ratio = std::log(na / nn);
  return m;
}

// Standard normal CDF.
inline double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace oracle
