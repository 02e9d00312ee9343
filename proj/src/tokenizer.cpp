#include "bioel/tokenizer.hpp"

#include <cctype>
#include <fstream>

#include "bioel/error.hpp"

namespace bioel {

namespace {

constexpr int kMaxCharsPerWord = 100;

bool is_ascii_punct(unsigned char c) { return std::ispunct(c) != 0; }

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_control(unsigned char c) { return c < 0x20 && !is_space(c); }

}  // namespace

std::vector<int> TokenSequence::content_ids() const {
  return std::vector<int>(ids.begin() + content_begin(), ids.begin() + content_end());
}

void TokenSequence::replace_content(const std::vector<int>& content) {
  if (int(content.size()) != content_len()) {
    throw InvariantError("replace_content: token count changed");
  }
  std::copy(content.begin(), content.end(), ids.begin() + content_begin());
}

std::vector<bool> TokenSequence::content_mask() const {
  std::vector<bool> mask(ids.size(), false);
  for (int i = content_begin(); i < content_end(); ++i) mask[std::size_t(i)] = true;
  return mask;
}

std::vector<bool> TokenSequence::real_mask() const {
  std::vector<bool> mask(ids.size(), false);
  for (int i = 0; i < real_len; ++i) mask[std::size_t(i)] = true;
  return mask;
}

void TokenSequence::pad_to(int total_len, int pad_id) {
  while (int(ids.size()) < total_len) ids.push_back(pad_id);
}

Vocab make_vocab(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens = std::move(tokens);
  v.ids.reserve(v.tokens.size());
  for (std::size_t i = 0; i < v.tokens.size(); ++i) {
    const std::string& tok = v.tokens[i];
    if (tok.empty()) {
      throw DataError("vocabulary: empty token at line " + std::to_string(i + 1));
    }
    for (unsigned char c : tok) {
      if (is_space(c)) {
        throw DataError("vocabulary: token with whitespace at line " + std::to_string(i + 1));
      }
    }
    if (!v.ids.emplace(tok, int(i)).second) {
      throw DataError("vocabulary: duplicate token \"" + tok + "\" at line " +
                      std::to_string(i + 1));
    }
  }
  v.cls_id = v.id("[CLS]");
  v.sep_id = v.id("[SEP]");
  v.unk_id = v.id("[UNK]");
  v.pad_id = v.id("[PAD]");
  for (const char* name : {"[CLS]", "[SEP]", "[UNK]", "[PAD]"}) {
    if (v.id(name) < 0) {
      throw DataError(std::string("vocabulary: missing special token ") + name);
    }
  }
  return v;
}

Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  if (in.bad()) throw DataError("error reading vocabulary file: " + path);
  if (tokens.empty()) throw DataError("empty vocabulary file: " + path);
  return make_vocab(std::move(tokens));
}

std::vector<std::string> clean_words(const std::string& text, bool lowercase) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (is_control(c)) continue;
    if (is_space(c)) {
      cleaned.push_back(' ');
    } else if (is_ascii_punct(c)) {
      cleaned.push_back(' ');
      cleaned.push_back(char(c));
      cleaned.push_back(' ');
    } else {
      cleaned.push_back(lowercase ? char(std::tolower(c)) : char(c));
    }
  }
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    std::size_t j = i;
    while (j < cleaned.size() && cleaned[j] != ' ') ++j;
    if (j > i) words.push_back(cleaned.substr(i, j - i));
    i = j;
  }
  return words;
}

TokenSequence tokenize(const std::string& text, const Vocab& vocab, const TokenizerConfig& cfg) {
  if (cfg.max_len < 3) throw ConfigError("tokenizer max_len must be at least 3");
  TokenSequence seq;
  seq.ids.push_back(vocab.cls_id);
  for (const std::string& word : clean_words(text, cfg.lowercase)) {
    if (int(word.size()) > kMaxCharsPerWord) {
      seq.ids.push_back(vocab.unk_id);
      continue;
    }
    std::vector<int> pieces;
    bool bad = false;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = word.size();
      int match = -1;
      while (start < end) {
        std::string piece = word.substr(start, end - start);
        if (start > 0) piece = "##" + piece;
        match = vocab.id(piece);
        if (match >= 0) break;
        --end;
      }
      if (match < 0) {
        bad = true;
        break;
      }
      pieces.push_back(match);
      start = end;
    }
    if (bad) {
      seq.ids.push_back(vocab.unk_id);
    } else {
      seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
    }
  }
  seq.ids.push_back(vocab.sep_id);
  if (int(seq.ids.size()) > cfg.max_len) {
    seq.ids.resize(std::size_t(cfg.max_len));
    seq.ids.back() = vocab.sep_id;
  }
  seq.has_specials = true;
  seq.real_len = int(seq.ids.size());
  return seq;
}

}  // namespace bioel
