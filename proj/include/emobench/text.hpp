#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace emobench {

// Lowercases, strips C0 control characters (except \n and \t, which count as
// whitespace), collapses whitespace runs to single spaces, and trims.
std::string preprocess(const std::string& text);

// Whitespace split, then leading/trailing ASCII punctuation peeled into
// separate tokens. Emoji shortcodes of the form :name: or {name} survive as
// single tokens.
std::vector<std::string> tokenize(const std::string& cleaned);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;

  // Tokens with frequency >= min_freq, most frequent first, ties broken
  // lexicographically, total size (reserved ids included) capped at max_size.
  // Corpus must come from the training split only.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_freq = 2, std::size_t max_size = 8000);

  std::int32_t id_of(const std::string& token) const;  // kUnk for OOV
  const std::string& token_of(std::int32_t id) const;
  bool contains(const std::string& token) const;
  std::size_t size() const { return id_to_token_.size(); }

  // One token per line, line number == id (reserved tokens on lines 0-2).
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& content);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  std::uint64_t content_hash() const;

 private:
  Vocabulary();
  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
};

struct TokenizedPair {
  std::vector<std::int32_t> primary_ids;   // CLS-prefixed, PAD-padded to max_len
  std::size_t primary_len = 0;             // real tokens incl. CLS, >= 1
  std::vector<std::int32_t> polarity_ids;  // deduplicated, first-occurrence order
  std::size_t polarity_len = 0;
};

inline constexpr std::size_t kDefaultMaxLen = 64;
inline constexpr std::size_t kPolarityCap = 16;

// polarity_words must come from the polarity extractor run on the same
// utterance. Truncates/pads the primary sequence to max_len, deduplicates the
// polarity words and caps them at kPolarityCap.
TokenizedPair encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                     const std::vector<std::string>& polarity_words,
                     std::size_t max_len = kDefaultMaxLen);

// Inverse of encode up to UNK substitution and truncation; drops PAD and CLS.
std::vector<std::string> decode(const TokenizedPair& pair, const Vocabulary& vocab);

}  // namespace emobench
