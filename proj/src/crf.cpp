#include "ldntag/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldntag {

CrfModel make_crf(std::size_t num_tags, std::size_t feature_dim, std::size_t hidden_dim) {
  if (num_tags < 1 || feature_dim < 1)
    throw std::runtime_error("CRF needs at least one tag and one feature");
  CrfModel m;
  m.num_tags = num_tags;
  m.feature_dim = feature_dim;
  m.hidden_dim = hidden_dim;
  std::size_t inner = hidden_dim > 0 ? hidden_dim : feature_dim;
  if (hidden_dim > 0) {
    m.w1 = Matrix(hidden_dim, feature_dim);
    m.b1.assign(hidden_dim, 0.0);
  }
  m.w2 = Matrix(num_tags, inner);
  m.b2.assign(num_tags, 0.0);
  m.transitions = Matrix(num_tags, num_tags);
  m.start_scores.assign(num_tags, 0.0);
  m.stop_scores.assign(num_tags, 0.0);
  return m;
}

CrfGradients make_gradients(const CrfModel& m) {
  CrfGradients g;
  g.w1 = Matrix(m.w1.rows(), m.w1.cols());
  g.b1.assign(m.b1.size(), 0.0);
  g.w2 = Matrix(m.w2.rows(), m.w2.cols());
  g.b2.assign(m.b2.size(), 0.0);
  g.transitions = Matrix(m.num_tags, m.num_tags);
  g.start_scores.assign(m.num_tags, 0.0);
  g.stop_scores.assign(m.num_tags, 0.0);
  return g;
}

std::size_t num_bio_tags(std::size_t num_categories) { return 2 * num_categories + 1; }

std::size_t tag_index(const BioTag& tag) {
  if (tag.kind == BioKind::O) return 0;
  return 1 + 2 * tag.category + (tag.kind == BioKind::I ? 1 : 0);
}

BioTag tag_from_index(std::size_t index) {
  if (index == 0) return BioTag::o();
  std::size_t cat = (index - 1) / 2;
  return index % 2 == 1 ? BioTag::b(cat) : BioTag::i(cat);
}

namespace {

bool is_inside_tag(std::size_t index) { return index >= 2 && index % 2 == 0; }

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

}  // namespace

TransitionMask constrained_transitions(std::size_t num_categories) {
  const std::size_t t = num_bio_tags(num_categories);
  TransitionMask mask;
  mask.num_tags = t;
  mask.transition_allowed.assign(t * t, 1);
  mask.start_allowed.assign(t, 1);
  for (std::size_t to = 0; to < t; ++to) {
    if (!is_inside_tag(to)) continue;
    mask.start_allowed[to] = 0;
    for (std::size_t from = 0; from < t; ++from) {
      // I-X is reachable only from B-X (to - 1) or I-X itself
      if (from != to && from != to - 1) mask.transition_allowed[from * t + to] = 0;
    }
  }
  return mask;
}

TransitionMask constrained_transitions(const TagSet& tagset) {
  return constrained_transitions(tagset.size());
}

void apply_mask(CrfModel& m, const TransitionMask& mask) {
  if (mask.num_tags != m.num_tags) throw std::runtime_error("mask/model tag count mismatch");
  for (std::size_t i = 0; i < m.num_tags; ++i)
    for (std::size_t j = 0; j < m.num_tags; ++j)
      if (!mask.allowed(i, j)) m.transitions(i, j) = kForbiddenScore;
  for (std::size_t j = 0; j < m.num_tags; ++j)
    if (!mask.start_ok(j)) m.start_scores[j] = kForbiddenScore;
}

namespace {

// Emission scores plus, when the encoder is active, the tanh activations
// needed for backpropagation.
void compute_emissions(const CrfModel& m, const Matrix& feats, Matrix& scores,
                       Matrix& hidden) {
  if (feats.cols() != m.feature_dim)
    throw std::runtime_error("feature width " + std::to_string(feats.cols()) +
                             " does not match model feature_dim " +
                             std::to_string(m.feature_dim));
  const std::size_t n = feats.rows();
  scores = Matrix(n, m.num_tags);
  if (m.hidden_dim == 0) {
    for (std::size_t t = 0; t < n; ++t) {
      auto f = feats.row(t);
      for (std::size_t j = 0; j < m.num_tags; ++j) {
        auto w = m.w2.row(j);
        double s = m.b2[j];
        for (std::size_t c = 0; c < f.size(); ++c) s += w[c] * f[c];
        scores(t, j) = s;
      }
    }
    return;
  }
  hidden = Matrix(n, m.hidden_dim);
  for (std::size_t t = 0; t < n; ++t) {
    auto f = feats.row(t);
    for (std::size_t h = 0; h < m.hidden_dim; ++h) {
      auto w = m.w1.row(h);
      double pre = m.b1[h];
      for (std::size_t c = 0; c < f.size(); ++c) pre += w[c] * f[c];
      hidden(t, h) = std::tanh(pre);
    }
    auto hrow = hidden.row(t);
    for (std::size_t j = 0; j < m.num_tags; ++j) {
      auto w = m.w2.row(j);
      double s = m.b2[j];
      for (std::size_t h = 0; h < m.hidden_dim; ++h) s += w[h] * hrow[h];
      scores(t, j) = s;
    }
  }
}

Matrix forward_lattice(const EmissionMatrix& e, const CrfModel& m) {
  const std::size_t n = e.rows(), t_count = m.num_tags;
  Matrix alpha(n, t_count);
  for (std::size_t j = 0; j < t_count; ++j) alpha(0, j) = m.start_scores[j] + e(0, j);
  std::vector<double> work(t_count);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < t_count; ++j) {
      for (std::size_t i = 0; i < t_count; ++i)
        work[i] = alpha(t - 1, i) + m.transitions(i, j);
      alpha(t, j) = e(t, j) + logsumexp(work);
    }
  }
  return alpha;
}

Matrix backward_lattice(const EmissionMatrix& e, const CrfModel& m) {
  const std::size_t n = e.rows(), t_count = m.num_tags;
  Matrix beta(n, t_count);
  for (std::size_t j = 0; j < t_count; ++j) beta(n - 1, j) = m.stop_scores[j];
  std::vector<double> work(t_count);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < t_count; ++i) {
      for (std::size_t j = 0; j < t_count; ++j)
        work[j] = m.transitions(i, j) + e(t + 1, j) + beta(t + 1, j);
      beta(t, i) = logsumexp(work);
    }
  }
  return beta;
}

}  // namespace

EmissionMatrix emissions(const CrfModel& m, const Matrix& feats) {
  Matrix scores, hidden;
  compute_emissions(m, feats, scores, hidden);
  return scores;
}

double sequence_score(const EmissionMatrix& e, const CrfModel& m,
                      std::span<const std::size_t> tags) {
  if (tags.empty()) throw std::runtime_error("empty tag sequence");
  if (tags.size() != e.rows()) throw std::runtime_error("tag/emission length mismatch");
  for (std::size_t y : tags)
    if (y >= m.num_tags) throw std::runtime_error("tag index out of range");
  double score = m.start_scores[tags[0]] + e(0, tags[0]);
  for (std::size_t t = 1; t < tags.size(); ++t)
    score += m.transitions(tags[t - 1], tags[t]) + e(t, tags[t]);
  score += m.stop_scores[tags.back()];
  return score;
}

double forward_log_partition(const EmissionMatrix& e, const CrfModel& m) {
  if (e.rows() == 0) throw std::runtime_error("empty emission matrix");
  Matrix alpha = forward_lattice(e, m);
  std::vector<double> final_scores(m.num_tags);
  for (std::size_t j = 0; j < m.num_tags; ++j)
    final_scores[j] = alpha(e.rows() - 1, j) + m.stop_scores[j];
  return logsumexp(final_scores);
}

ViterbiResult viterbi(const EmissionMatrix& e, const CrfModel& m) {
  const std::size_t n = e.rows(), t_count = m.num_tags;
  if (n == 0) throw std::runtime_error("empty emission matrix");

  Matrix delta(n, t_count);
  std::vector<std::vector<std::size_t>> psi(n, std::vector<std::size_t>(t_count, 0));
  for (std::size_t j = 0; j < t_count; ++j) delta(0, j) = m.start_scores[j] + e(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < t_count; ++j) {
      std::size_t best_i = 0;
      double best = delta(t - 1, 0) + m.transitions(0, j);
      for (std::size_t i = 1; i < t_count; ++i) {
        double v = delta(t - 1, i) + m.transitions(i, j);
        if (v > best) {
          best = v;
          best_i = i;
        }
      }
      delta(t, j) = e(t, j) + best;
      psi[t][j] = best_i;
    }
  }

  std::size_t best_j = 0;
  double best = delta(n - 1, 0) + m.stop_scores[0];
  for (std::size_t j = 1; j < t_count; ++j) {
    double v = delta(n - 1, j) + m.stop_scores[j];
    if (v > best) {
      best = v;
      best_j = j;
    }
  }

  ViterbiResult result;
  result.score = best;
  result.tags.assign(n, 0);
  result.tags[n - 1] = best_j;
  for (std::size_t t = n - 1; t > 0; --t) result.tags[t - 1] = psi[t][result.tags[t]];
  return result;
}

std::pair<double, CrfGradients> nll_and_gradient(const CrfModel& m, const Matrix& feats,
                                                 std::span<const std::size_t> gold_tags) {
  const std::size_t n = feats.rows();
  if (n == 0) throw std::runtime_error("empty feature matrix");
  if (gold_tags.size() != n) throw std::runtime_error("gold tag length mismatch");
  for (std::size_t y : gold_tags)
    if (y >= m.num_tags) throw std::runtime_error("gold tag index out of range");

  Matrix e, hidden;
  compute_emissions(m, feats, e, hidden);
  Matrix alpha = forward_lattice(e, m);
  Matrix beta = backward_lattice(e, m);

  std::vector<double> final_scores(m.num_tags);
  for (std::size_t j = 0; j < m.num_tags; ++j)
    final_scores[j] = alpha(n - 1, j) + m.stop_scores[j];
  const double log_z = logsumexp(final_scores);
  const double gold = sequence_score(e, m, gold_tags);
  const double loss = log_z - gold;
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite CRF loss");

  CrfGradients g = make_gradients(m);

  // d loss / d emissions = state marginals minus gold indicators
  Matrix de(n, m.num_tags);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < m.num_tags; ++j)
      de(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z) - (gold_tags[t] == j ? 1.0 : 0.0);

  for (std::size_t j = 0; j < m.num_tags; ++j) {
    g.start_scores[j] =
        std::exp(alpha(0, j) + beta(0, j) - log_z) - (gold_tags[0] == j ? 1.0 : 0.0);
    g.stop_scores[j] = std::exp(alpha(n - 1, j) + beta(n - 1, j) - log_z) -
                       (gold_tags[n - 1] == j ? 1.0 : 0.0);
  }

  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (std::size_t i = 0; i < m.num_tags; ++i)
      for (std::size_t j = 0; j < m.num_tags; ++j)
        g.transitions(i, j) += std::exp(alpha(t, i) + m.transitions(i, j) + e(t + 1, j) +
                                        beta(t + 1, j) - log_z);
    g.transitions(gold_tags[t], gold_tags[t + 1]) -= 1.0;
  }

  // chain rule into the encoder
  if (m.hidden_dim == 0) {
    for (std::size_t t = 0; t < n; ++t) {
      auto f = feats.row(t);
      for (std::size_t j = 0; j < m.num_tags; ++j) {
        double d = de(t, j);
        g.b2[j] += d;
        auto gw = g.w2.row(j);
        for (std::size_t c = 0; c < f.size(); ++c) gw[c] += d * f[c];
      }
    }
  } else {
    for (std::size_t t = 0; t < n; ++t) {
      auto f = feats.row(t);
      auto h = hidden.row(t);
      std::vector<double> dh(m.hidden_dim, 0.0);
      for (std::size_t j = 0; j < m.num_tags; ++j) {
        double d = de(t, j);
        g.b2[j] += d;
        auto gw = g.w2.row(j);
        auto w = m.w2.row(j);
        for (std::size_t k = 0; k < m.hidden_dim; ++k) {
          gw[k] += d * h[k];
          dh[k] += d * w[k];
        }
      }
      for (std::size_t k = 0; k < m.hidden_dim; ++k) {
        double dpre = dh[k] * (1.0 - h[k] * h[k]);
        g.b1[k] += dpre;
        auto gw = g.w1.row(k);
        for (std::size_t c = 0; c < f.size(); ++c) gw[c] += dpre * f[c];
      }
    }
  }
  return {loss, std::move(g)};
}

}  // namespace ldntag
