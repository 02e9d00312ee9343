#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bioel/data.hpp"
#include "bioel/encoder.hpp"
#include "bioel/index.hpp"
#include "bioel/rng.hpp"

namespace bioel {

struct ProbeSpec {
  enum class Kind { kShuffle, kScope };
  Kind kind = Kind::kShuffle;
  int ngram = 1;    // shuffle: contiguous n-gram size
  int window = 3;   // scope: odd attention window
  std::uint64_t seed = 0;
  bool cls_column_exempt = false;

  void validate() const;  // throws ConfigError
};

struct ProbeDatasetResult {
  std::string name;
  double baseline = 0.0;
  double probed = 0.0;
};

struct ProbeReport {
  std::string probe;  // "shuffle" or "scope"
  int param = 0;      // n or w
  std::uint64_t seed = 0;
  std::vector<ProbeDatasetResult> datasets;
  double avg_percent_change = 0.0;
};

// Chunks tokens left to right into contiguous n-grams (ragged tail kept) and
// permutes the chunk order uniformly at random; chunk contents are untouched.
std::vector<int> shuffle_ngrams(const std::vector<int>& tokens, int n, Rng& rng);

// Fraction of exact id matches.
double top1_accuracy(const std::vector<std::string>& predictions,
                     const std::vector<std::string>& gold);

// Mean over datasets of 100 * (probed - baseline) / baseline.
double avg_percent_change(const std::vector<double>& baseline,
                          const std::vector<double>& probed);

struct EvalOutcome {
  double top1 = 0.0;
  double topk = 0.0;
  int k = 1;
  std::size_t rows = 0;
};

// Links every mention against the index; the optional transform perturbs
// mention tokens before encoding.
EvalOutcome evaluate_linking(const Encoder& model, const Dataset& dataset,
                             const NameIndex& index, int k, const EncodeOptions& opts = {},
                             const TokenTransform& mention_transform = nullptr,
                             int threads = 1);

// Word-order permutation probe (both mentions and names are shuffled, the
// name index is rebuilt under the probe seed) or attention-scope restriction
// (attention encoders only; everything is re-encoded with the mask
// installed). The baseline is the unperturbed accuracy on the same split.
ProbeReport run_probe(const Encoder& model, const Dataset& dataset,
                      const std::string& dataset_name, const std::vector<EntityRecord>& kb,
                      const ProbeSpec& spec, int threads = 1);

}  // namespace bioel
