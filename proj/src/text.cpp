#include "emobench/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "emobench/checkpoint.hpp"
#include "emobench/error.hpp"

namespace emobench {
namespace {

// Only \n and \t count as whitespace among the control characters; the rest
// (including \r) are stripped outright.
bool is_space_char(unsigned char c) { return c == ' ' || c == '\n' || c == '\t'; }

bool is_c0_control(unsigned char c) { return c < 0x20 || c == 0x7f; }

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

bool is_shortcode(const std::string& token) {
  auto body_ok = [](const std::string& t, std::size_t from, std::size_t to) {
    if (to <= from) {
      return false;
    }
    for (std::size_t i = from; i < to; ++i) {
      const unsigned char c = static_cast<unsigned char>(t[i]);
      if (!(std::isalnum(c) || c == '_' || c == '-' || c == '+')) {
        return false;
      }
    }
    return true;
  };
  if (token.size() >= 3 && token.front() == ':' && token.back() == ':') {
    return body_ok(token, 1, token.size() - 1);
  }
  if (token.size() >= 3 && token.front() == '{' && token.back() == '}') {
    return body_ok(token, 1, token.size() - 1);
  }
  return false;
}

void split_token(const std::string& token, std::vector<std::string>& out) {
  if (token.empty()) {
    return;
  }
  if (is_shortcode(token) || token.size() == 1) {
    out.push_back(token);
    return;
  }
  // Trailing punctuation peels first so shortcodes like {face}! surface
  // before the leading-character rule can split their braces apart.
  if (is_ascii_punct(static_cast<unsigned char>(token.back()))) {
    split_token(token.substr(0, token.size() - 1), out);
    out.push_back(token.substr(token.size() - 1));
    return;
  }
  if (is_ascii_punct(static_cast<unsigned char>(token.front()))) {
    out.push_back(token.substr(0, 1));
    split_token(token.substr(1), out);
    return;
  }
  out.push_back(token);
}

const std::string kReserved[3] = {"<pad>", "<unk>", "<cls>"};

}  // namespace

std::string preprocess(const std::string& text) {
  std::string result;
  result.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space_char(c)) {
      pending_space = true;
      continue;
    }
    if (is_c0_control(c)) {
      continue;  // null bytes and other control characters dropped
    }
    if (pending_space && !result.empty()) {
      result.push_back(' ');
    }
    pending_space = false;
    result.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return result;
}

std::vector<std::string> tokenize(const std::string& cleaned) {
  std::vector<std::string> tokens;
  std::istringstream stream(cleaned);
  std::string word;
  while (stream >> word) {
    split_token(word, tokens);
  }
  return tokens;
}

Vocabulary::Vocabulary() {
  for (const std::string& r : kReserved) {
    token_to_id_.emplace(r, static_cast<std::int32_t>(id_to_token_.size()));
    id_to_token_.push_back(r);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_freq, std::size_t max_size) {
  if (corpus.empty()) {
    throw ConfigError("build_vocab: empty corpus");
  }
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : corpus) {
    for (const auto& token : doc) {
      ++freq[token];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  kept.reserve(freq.size());
  for (auto& [token, count] : freq) {
    if (count >= min_freq) {
      kept.emplace_back(token, count);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) {
      return a.second > b.second;
    }
    return a.first < b.first;  // ties: lexicographically smaller token first
  });
  Vocabulary vocab;
  for (const auto& [token, count] : kept) {
    if (vocab.id_to_token_.size() >= max_size) {
      break;
    }
    vocab.token_to_id_.emplace(token, static_cast<std::int32_t>(vocab.id_to_token_.size()));
    vocab.id_to_token_.push_back(token);
  }
  return vocab;
}

std::int32_t Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw IndexError("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) != 0;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& token : id_to_token_) {
    out += token;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::deserialize(const std::string& content) {
  Vocabulary vocab;
  std::istringstream stream(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    if (line_no < 3) {
      if (line != kReserved[line_no]) {
        throw ParseError("vocabulary: reserved token mismatch on line " +
                         std::to_string(line_no));
      }
    } else {
      vocab.token_to_id_.emplace(line, static_cast<std::int32_t>(vocab.id_to_token_.size()));
      vocab.id_to_token_.push_back(line);
    }
    ++line_no;
  }
  if (line_no < 3) {
    throw ParseError("vocabulary: file shorter than reserved block");
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("vocabulary: cannot open for writing: " + path);
  }
  out << serialize();
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("vocabulary: cannot open: " + path);
  }
  std::ostringstream content;
  content << in.rdbuf();
  return deserialize(content.str());
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a64(serialize()); }

TokenizedPair encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                     const std::vector<std::string>& polarity_words, std::size_t max_len) {
  if (max_len < 1) {
    throw ConfigError("encode: max_len must be >= 1");
  }
  TokenizedPair pair;
  pair.primary_ids.reserve(max_len);
  pair.primary_ids.push_back(Vocabulary::kCls);
  for (const auto& token : tokens) {
    if (pair.primary_ids.size() >= max_len) {
      break;
    }
    pair.primary_ids.push_back(vocab.id_of(token));
  }
  pair.primary_len = pair.primary_ids.size();
  pair.primary_ids.resize(max_len, Vocabulary::kPad);

  // Deduplicate at the id level: OOV polarity words collapse into one UNK
  // slot so duplicates never double-count attention mass.
  for (const auto& word : polarity_words) {
    if (pair.polarity_ids.size() >= kPolarityCap) {
      break;
    }
    const std::int32_t id = vocab.id_of(word);
    if (std::find(pair.polarity_ids.begin(), pair.polarity_ids.end(), id) ==
        pair.polarity_ids.end()) {
      pair.polarity_ids.push_back(id);
    }
  }
  pair.polarity_len = pair.polarity_ids.size();
  return pair;
}

std::vector<std::string> decode(const TokenizedPair& pair, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  for (std::size_t i = 1; i < pair.primary_len; ++i) {
    tokens.push_back(vocab.token_of(pair.primary_ids[i]));
  }
  return tokens;
}

}  // namespace emobench
