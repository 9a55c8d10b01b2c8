#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldntag/corpus.hpp"
#include "ldntag/matrix.hpp"

namespace ldntag {

/// Unnormalized log-potentials, one row per token, one column per tag.
using EmissionMatrix = Matrix;

/// Score pinned on transitions the BIO scheme forbids. Finite so that
/// log-sum-exp stays NaN-free, but decisively dominated.
inline constexpr double kForbiddenScore = -1.0e4;

/// Linear-chain CRF with an optional one-hidden-layer tanh encoder.
/// hidden_dim == 0 is the log-linear case (emissions = feats * w2^T + b2).
struct CrfModel {
  std::size_t num_tags = 0;    // T = 2 * |categories| + 1
  std::size_t feature_dim = 0; // F
  std::size_t hidden_dim = 0;  // H; 0 disables the encoder

  Matrix w1;                        // H x F
  std::vector<double> b1;           // H
  Matrix w2;                        // T x H (or T x F when H == 0)
  std::vector<double> b2;           // T
  Matrix transitions;               // T x T, [from][to]
  std::vector<double> start_scores; // T
  std::vector<double> stop_scores;  // T

  bool operator==(const CrfModel&) const = default;
};

/// Zero-initialized model with consistently sized parameter blocks.
CrfModel make_crf(std::size_t num_tags, std::size_t feature_dim, std::size_t hidden_dim);

/// Gradient holder with the same block shapes as CrfModel.
struct CrfGradients {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
  Matrix transitions;
  std::vector<double> start_scores;
  std::vector<double> stop_scores;
};

CrfGradients make_gradients(const CrfModel& m);

// Tag indexing: O = 0, then B-c, I-c pairs in tag-set order.
std::size_t num_bio_tags(std::size_t num_categories);
std::size_t tag_index(const BioTag& tag);
BioTag tag_from_index(std::size_t index);

struct TransitionMask {
  std::size_t num_tags = 0;
  std::vector<std::uint8_t> transition_allowed;  // T x T row-major
  std::vector<std::uint8_t> start_allowed;       // T

  bool allowed(std::size_t from, std::size_t to) const {
    return transition_allowed[from * num_tags + to] != 0;
  }
  bool start_ok(std::size_t tag) const { return start_allowed[tag] != 0; }
};

/// Forbids transitions into I-X from anything but B-X/I-X and starting at I-X.
TransitionMask constrained_transitions(std::size_t num_categories);
TransitionMask constrained_transitions(const TagSet& tagset);

/// Pins every forbidden transition/start score to kForbiddenScore.
void apply_mask(CrfModel& m, const TransitionMask& mask);

EmissionMatrix emissions(const CrfModel& m, const Matrix& feats);

/// start + emissions along the path + transitions + stop.
double sequence_score(const EmissionMatrix& e, const CrfModel& m,
                      std::span<const std::size_t> tags);

/// log of the summed exp-scores of all T^n tag sequences (stable recurrence).
double forward_log_partition(const EmissionMatrix& e, const CrfModel& m);

struct ViterbiResult {
  std::vector<std::size_t> tags;
  double score = 0.0;
};

/// Best-scoring tag sequence; ties resolved toward the lowest tag index at
/// each backtracking step.
ViterbiResult viterbi(const EmissionMatrix& e, const CrfModel& m);

/// Negative log-likelihood of the gold path and exact gradients for every
/// parameter block (forward-backward marginals, chain rule through the
/// encoder). Throws when an intermediate stops being finite.
std::pair<double, CrfGradients> nll_and_gradient(const CrfModel& m, const Matrix& feats,
                                                 std::span<const std::size_t> gold_tags);

}  // namespace ldntag
