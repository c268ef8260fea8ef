#include "emobench/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "emobench/error.hpp"
#include "emobench/text.hpp"

namespace emobench {
namespace {

struct SenseAccumulator {
  double pos_weighted = 0.0;
  double neg_weighted = 0.0;
  double weight_total = 0.0;
};

const std::unordered_set<std::string>& stoplist() {
  static const std::unordered_set<std::string> words = {
      "the",   "a",     "an",    "and",   "or",    "but",    "if",    "of",    "in",
      "on",    "at",    "to",    "for",   "with",  "by",     "from",  "as",    "is",
      "are",   "was",   "were",  "be",    "been",  "being",  "am",    "do",    "does",
      "did",   "have",  "has",   "had",   "will",  "would",  "can",   "could", "should",
      "shall", "may",   "might", "must",  "i",     "you",    "he",    "she",   "it",
      "we",    "they",  "me",    "him",   "her",   "us",     "them",  "my",    "your",
      "his",   "its",   "our",   "their", "this",  "that",   "these", "those", "there",
      "here",  "what",  "which", "who",   "whom",  "when",   "where", "why",   "how",
      "not",   "no",    "nor",   "so",    "than",  "then",   "too",   "very",  "just",
      "only",  "own",   "same",  "such",  "each",  "both",   "all",   "any",   "some",
      "because", "while", "during", "before", "after", "again", "once", "about", "into",
      "over",  "under", "out",   "up",    "down",  "off",    "also",  "s",     "t",
      "re",    "ve",    "ll",    "d",     "m",     "now"};
  return words;
}

bool ends_with(const std::string& word, const char* suffix) {
  const std::size_t n = std::string::traits_type::length(suffix);
  return word.size() > n && word.compare(word.size() - n, n, suffix) == 0;
}

std::string entry_key(const std::string& word, PosTag pos) {
  std::string key = word;
  key.push_back('#');
  key.push_back(pos_tag_letter(pos));
  return key;
}

double parse_score(const std::string& field, std::size_t line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw ParseError("lexicon: non-numeric score '" + field + "'", line_no);
  }
  if (consumed != field.size()) {
    throw ParseError("lexicon: non-numeric score '" + field + "'", line_no);
  }
  if (value < 0.0 || value > 1.0) {
    throw ParseError("lexicon: score out of [0,1]: " + field, line_no);
  }
  return value;
}

}  // namespace

char pos_tag_letter(PosTag tag) {
  switch (tag) {
    case PosTag::Noun:
      return 'n';
    case PosTag::Verb:
      return 'v';
    case PosTag::Adjective:
      return 'a';
    case PosTag::Adverb:
      return 'r';
    case PosTag::Other:
      return 'o';
  }
  return 'n';
}

PosTag pos_tag_from_letter(char c) {
  switch (c) {
    case 'n':
      return PosTag::Noun;
    case 'v':
      return PosTag::Verb;
    case 'a':
    case 's':  // satellite adjectives fold into 'a'
      return PosTag::Adjective;
    case 'r':
      return PosTag::Adverb;
    default:
      return PosTag::Other;
  }
}

PolarityLexicon PolarityLexicon::parse(std::istream& stream) {
  std::unordered_map<std::string, SenseAccumulator> accum;
  std::unordered_map<std::string, std::pair<std::string, PosTag>> key_parts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    // Six tab-separated columns; the gloss may contain anything but tabs.
    std::array<std::string, 5> cols;
    std::size_t start = 0;
    for (std::size_t c = 0; c < 5; ++c) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        throw ParseError("lexicon: expected 6 tab-separated columns", line_no);
      }
      cols[c] = line.substr(start, tab - start);
      start = tab + 1;
    }
    // Remainder is the gloss; unused.
    if (cols[0].size() != 1) {
      throw ParseError("lexicon: bad POS column '" + cols[0] + "'", line_no);
    }
    const PosTag pos = pos_tag_from_letter(cols[0][0]);
    if (pos == PosTag::Other) {
      throw ParseError("lexicon: unknown POS letter '" + cols[0] + "'", line_no);
    }
    const double pos_score = parse_score(cols[2], line_no);
    const double neg_score = parse_score(cols[3], line_no);
    if (pos_score + neg_score > 1.0 + 1e-9) {
      throw ParseError("lexicon: pos+neg exceeds 1", line_no);
    }
    std::istringstream terms(cols[4]);
    std::string term;
    while (terms >> term) {
      const std::size_t hash = term.rfind('#');
      if (hash == std::string::npos || hash == 0 || hash + 1 >= term.size()) {
        throw ParseError("lexicon: malformed synset term '" + term + "'", line_no);
      }
      std::size_t rank = 0;
      try {
        rank = static_cast<std::size_t>(std::stoul(term.substr(hash + 1)));
      } catch (const std::exception&) {
        throw ParseError("lexicon: malformed sense rank in '" + term + "'", line_no);
      }
      if (rank == 0) {
        throw ParseError("lexicon: sense rank must be >= 1 in '" + term + "'", line_no);
      }
      const std::string word = term.substr(0, hash);
      const double weight = 1.0 / static_cast<double>(rank);
      const std::string key = entry_key(word, pos);
      auto& acc = accum[key];
      acc.pos_weighted += weight * pos_score;
      acc.neg_weighted += weight * neg_score;
      acc.weight_total += weight;
      key_parts.emplace(key, std::make_pair(word, pos));
    }
  }
  PolarityLexicon lexicon;
  std::unordered_map<std::string, std::pair<double, double>> fallback_sums;
  std::unordered_map<std::string, std::size_t> fallback_counts;
  for (const auto& [key, acc] : accum) {
    const auto& [word, pos] = key_parts.at(key);
    LexiconEntry entry;
    entry.word = word;
    entry.pos = pos;
    entry.pos_score = acc.pos_weighted / acc.weight_total;
    entry.neg_score = acc.neg_weighted / acc.weight_total;
    lexicon.entries_.emplace(key, entry);
    auto& sums = fallback_sums[word];
    sums.first += entry.pos_score;
    sums.second += entry.neg_score;
    ++fallback_counts[word];
  }
  for (const auto& [word, sums] : fallback_sums) {
    const double n = static_cast<double>(fallback_counts.at(word));
    LexiconEntry entry;
    entry.word = word;
    entry.pos = PosTag::Other;  // fallback entries carry no single POS
    entry.pos_score = sums.first / n;
    entry.neg_score = sums.second / n;
    lexicon.fallback_.emplace(word, entry);
  }
  return lexicon;
}

PolarityLexicon PolarityLexicon::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("lexicon: cannot open: " + path);
  }
  return parse(in);
}

std::optional<LexiconEntry> PolarityLexicon::lookup(const std::string& word, PosTag pos) const {
  if (pos != PosTag::Other) {
    auto it = entries_.find(entry_key(word, pos));
    if (it != entries_.end()) {
      return it->second;
    }
  }
  auto fb = fallback_.find(word);
  if (fb != fallback_.end()) {
    return fb->second;
  }
  return std::nullopt;
}

bool PolarityLexicon::known_as(const std::string& word, PosTag pos) const {
  return entries_.count(entry_key(word, pos)) != 0;
}

std::optional<PosTag> PolarityLexicon::unique_pos(const std::string& word) const {
  std::optional<PosTag> found;
  for (PosTag pos : {PosTag::Noun, PosTag::Verb, PosTag::Adjective, PosTag::Adverb}) {
    if (known_as(word, pos)) {
      if (found) {
        return std::nullopt;  // ambiguous
      }
      found = pos;
    }
  }
  return found;
}

std::vector<PosTag> pos_tag(const std::vector<std::string>& tokens,
                            const PolarityLexicon& lexicon) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (stoplist().count(token)) {
      tags.push_back(PosTag::Other);
      continue;
    }
    if (ends_with(token, "ly")) {
      tags.push_back(PosTag::Adverb);
      continue;
    }
    bool tagged = false;
    for (const char* suffix : {"ing", "ed"}) {
      if (!ends_with(token, suffix)) {
        continue;
      }
      const std::string bare = token.substr(0, token.size() - std::strlen(suffix));
      // try stem, stem+e ("surpris" -> "surprise"), and undoubled consonant
      std::vector<std::string> candidates = {bare, bare + "e"};
      if (bare.size() >= 2 && bare[bare.size() - 1] == bare[bare.size() - 2]) {
        candidates.push_back(bare.substr(0, bare.size() - 1));
      }
      for (const auto& stem : candidates) {
        if (!stem.empty() && lexicon.known_as(stem, PosTag::Verb)) {
          tags.push_back(PosTag::Verb);
          tagged = true;
          break;
        }
      }
      if (tagged) {
        break;
      }
    }
    if (tagged) {
      continue;
    }
    if (ends_with(token, "ous") || ends_with(token, "ful") || ends_with(token, "ive") ||
        ends_with(token, "able") || ends_with(token, "al")) {
      tags.push_back(PosTag::Adjective);
      continue;
    }
    if (auto unique = lexicon.unique_pos(token)) {
      tags.push_back(*unique);
      continue;
    }
    tags.push_back(PosTag::Noun);
  }
  return tags;
}

std::vector<PolarityWord> extract_polarity_words(const std::vector<std::string>& tokens,
                                                 const std::vector<PosTag>& tags,
                                                 const PolarityLexicon& lexicon, double tau) {
  if (tokens.size() != tags.size()) {
    throw ContractError("extract_polarity_words: tokens and tags not aligned");
  }
  if (tau < 0.0) {
    throw ConfigError("extract_polarity_words: tau must be >= 0");
  }
  std::vector<PolarityWord> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& word = tokens[i];
    if (word.find('_') != std::string::npos || seen.count(word)) {
      continue;
    }
    const auto entry = lexicon.lookup(word, tags[i]);
    if (!entry) {
      continue;
    }
    const double strength = std::max(entry->pos_score, entry->neg_score);
    if (strength < tau) {
      continue;
    }
    seen.insert(word);
    out.push_back({word, entry->pos_score >= entry->neg_score, strength});
  }
  return out;
}

std::vector<PolarityWord> polarity_words_for(const std::string& raw_text,
                                             const PolarityLexicon& lexicon, double tau) {
  const auto tokens = tokenize(preprocess(raw_text));
  const auto tags = pos_tag(tokens, lexicon);
  return extract_polarity_words(tokens, tags, lexicon, tau);
}

PolarityStats polarity_stats(const std::vector<std::vector<PolarityWord>>& per_utterance) {
  PolarityStats stats;
  stats.utterances = per_utterance.size();
  if (per_utterance.empty()) {
    return stats;
  }
  std::size_t covered = 0;
  for (const auto& words : per_utterance) {
    stats.total_polarity_words += words.size();
    if (!words.empty()) {
      ++covered;
    }
  }
  stats.mean_words_per_utterance =
      static_cast<double>(stats.total_polarity_words) / static_cast<double>(stats.utterances);
  stats.coverage = static_cast<double>(covered) / static_cast<double>(stats.utterances);
  return stats;
}

}  // namespace emobench
