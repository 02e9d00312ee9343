#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace bioel {

// WordPiece vocabulary. Ids are dense 0..V-1 in file line order; the four
// special tokens must be present.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> ids;
  int cls_id = -1;
  int sep_id = -1;
  int unk_id = -1;
  int pad_id = -1;

  int size() const { return int(tokens.size()); }
  int id(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? -1 : it->second;
  }
};

// One token per line, id = zero-based line number, UTF-8, LF-terminated
// (trailing CR tolerated and stripped).
Vocab load_vocab(const std::string& path);
Vocab make_vocab(std::vector<std::string> tokens);

struct TokenSequence {
  std::vector<int> ids;
  bool has_specials = true;
  int real_len = 0;  // count excluding padding

  int size() const { return int(ids.size()); }
  int padding() const { return int(ids.size()) - real_len; }
  // First/last content position, excluding [CLS]/[SEP]/[PAD].
  int content_begin() const { return has_specials ? 1 : 0; }
  int content_end() const { return has_specials ? real_len - 1 : real_len; }
  int content_len() const { return content_end() - content_begin(); }
  std::vector<int> content_ids() const;
  void replace_content(const std::vector<int>& content);
  // Row flags over all positions: true only for content positions.
  std::vector<bool> content_mask() const;
  // Row flags over all positions: true for real (non-pad) positions.
  std::vector<bool> real_mask() const;
  // Appends n [PAD] ids without changing real_len.
  void pad_to(int total_len, int pad_id);
};

struct TokenizerConfig {
  bool lowercase = true;
  int max_len = 25;
};

// Basic cleanup (whitespace normalization, optional ASCII lowercasing,
// punctuation split), then greedy longest-match-first WordPiece per word
// with "##" continuation prefix; words with no match map to [UNK].
// [CLS]/[SEP] are attached and the sequence is truncated to max_len with
// [SEP] kept last.
TokenSequence tokenize(const std::string& text, const Vocab& vocab, const TokenizerConfig& cfg);

// Cleaned words as the tokenizer would see them, before WordPiece.
std::vector<std::string> clean_words(const std::string& text, bool lowercase);

}  // namespace bioel
