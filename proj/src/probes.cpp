#include "bioel/probes.hpp"

#include <algorithm>

#include "bioel/error.hpp"
#include "bioel/parallel.hpp"

namespace bioel {

namespace {

constexpr std::uint64_t kNameStream = 1;
constexpr std::uint64_t kMentionStream = 2;

}  // namespace

void ProbeSpec::validate() const {
  if (kind == Kind::kShuffle && ngram < 1) {
    throw ConfigError("shuffle probe needs n >= 1");
  }
  if (kind == Kind::kScope && (window < 1 || window % 2 == 0)) {
    throw ConfigError("scope probe needs an odd positive window");
  }
}

std::vector<int> shuffle_ngrams(const std::vector<int>& tokens, int n, Rng& rng) {
  if (n < 1) throw ConfigError("n-gram size must be at least 1");
  const std::size_t chunks = (tokens.size() + std::size_t(n) - 1) / std::size_t(n);
  std::vector<std::size_t> order(chunks);
  for (std::size_t i = 0; i < chunks; ++i) order[i] = i;
  for (std::size_t i = chunks; i > 1; --i) {
    std::swap(order[i - 1], order[std::size_t(rng.below(i))]);
  }
  std::vector<int> out;
  out.reserve(tokens.size());
  for (std::size_t c : order) {
    const std::size_t begin = c * std::size_t(n);
    const std::size_t end = std::min(tokens.size(), begin + std::size_t(n));
    out.insert(out.end(), tokens.begin() + std::ptrdiff_t(begin),
               tokens.begin() + std::ptrdiff_t(end));
  }
  return out;
}

double top1_accuracy(const std::vector<std::string>& predictions,
                     const std::vector<std::string>& gold) {
  if (predictions.size() != gold.size()) {
    throw InvariantError("top1_accuracy: prediction and gold counts disagree");
  }
  if (predictions.empty()) throw InvariantError("top1_accuracy: empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == gold[i]) ++hits;
  }
  return double(hits) / double(predictions.size());
}

double avg_percent_change(const std::vector<double>& baseline,
                          const std::vector<double>& probed) {
  if (baseline.size() != probed.size() || baseline.empty()) {
    throw InvariantError("avg_percent_change: inputs must be equal-length and nonempty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (baseline[i] == 0.0) {
      throw InvariantError("avg_percent_change: zero baseline at position " + std::to_string(i));
    }
    sum += 100.0 * (probed[i] - baseline[i]) / baseline[i];
  }
  return sum / double(baseline.size());
}

EvalOutcome evaluate_linking(const Encoder& model, const Dataset& dataset,
                             const NameIndex& index, int k, const EncodeOptions& opts,
                             const TokenTransform& mention_transform, int threads) {
  if (dataset.rows.empty()) throw DataError("empty dataset");
  if (k < 1) throw ConfigError("k must be at least 1");
  const std::size_t n = dataset.rows.size();
  std::vector<std::string> top(n);
  std::vector<char> in_topk(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    TokenSequence toks = model.tokenize(dataset.rows[i].mention);
    if (mention_transform) toks = mention_transform(toks, i);
    const Vecf q = to_unit_query(model.encode_tokens(toks, opts));
    const auto ranked = rank_entities(q, index, k, 1);
    top[i] = ranked.front().entity_id;
    for (const Linked& hit : ranked) {
      if (hit.entity_id == dataset.rows[i].entity_id) {
        in_topk[i] = 1;
        break;
      }
    }
  });
  EvalOutcome out;
  out.k = k;
  out.rows = n;
  std::vector<std::string> gold;
  gold.reserve(n);
  for (const DatasetRow& row : dataset.rows) gold.push_back(row.entity_id);
  out.top1 = top1_accuracy(top, gold);
  std::size_t hits = 0;
  for (char c : in_topk) hits += std::size_t(c);
  out.topk = double(hits) / double(n);
  return out;
}

ProbeReport run_probe(const Encoder& model, const Dataset& dataset,
                      const std::string& dataset_name, const std::vector<EntityRecord>& kb,
                      const ProbeSpec& spec, int threads) {
  spec.validate();
  if (spec.kind == ProbeSpec::Kind::kScope && !model.attention_scoped()) {
    throw ConfigError("scope probe requested for a model without attention: there is no "
                      "attention scope to restrict");
  }

  const NameIndex baseline_index = build_index(model, kb, threads);
  const EvalOutcome baseline = evaluate_linking(model, dataset, baseline_index, 1, {}, nullptr,
                                                threads);

  EvalOutcome probed;
  if (spec.kind == ProbeSpec::Kind::kShuffle) {
    const int n = spec.ngram;
    const std::uint64_t seed = spec.seed;
    auto shuffle_content = [n](const TokenSequence& toks, std::uint64_t item_seed) {
      Rng rng(item_seed);
      TokenSequence out = toks;
      out.replace_content(shuffle_ngrams(toks.content_ids(), n, rng));
      return out;
    };
    const TokenTransform name_transform = [&, seed](const TokenSequence& toks,
                                                    std::size_t ordinal) {
      return shuffle_content(toks, Rng::mix(Rng::mix(seed, kNameStream), ordinal));
    };
    const TokenTransform mention_transform = [&, seed](const TokenSequence& toks,
                                                       std::size_t ordinal) {
      return shuffle_content(toks, Rng::mix(Rng::mix(seed, kMentionStream), ordinal));
    };
    const NameIndex probe_index = build_index(model, kb, threads, {}, name_transform);
    probed = evaluate_linking(model, dataset, probe_index, 1, {}, mention_transform, threads);
  } else {
    EncodeOptions opts;
    opts.attention_window = spec.window;
    opts.cls_column_exempt = spec.cls_column_exempt;
    const NameIndex probe_index = build_index(model, kb, threads, opts);
    probed = evaluate_linking(model, dataset, probe_index, 1, opts, nullptr, threads);
  }

  ProbeReport report;
  report.probe = spec.kind == ProbeSpec::Kind::kShuffle ? "shuffle" : "scope";
  report.param = spec.kind == ProbeSpec::Kind::kShuffle ? spec.ngram : spec.window;
  report.seed = spec.seed;
  report.datasets.push_back(ProbeDatasetResult{dataset_name, baseline.top1, probed.top1});
  report.avg_percent_change = avg_percent_change({baseline.top1}, {probed.top1});
  return report;
}

}  // namespace bioel
