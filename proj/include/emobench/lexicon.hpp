#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace emobench {

// Coarse part-of-speech classes matching the lexicon's POS column; satellite
// adjectives ('s') fold into Adjective at parse time.
enum class PosTag { Noun, Verb, Adjective, Adverb, Other };

char pos_tag_letter(PosTag tag);
PosTag pos_tag_from_letter(char c);

struct LexiconEntry {
  std::string word;
  PosTag pos = PosTag::Noun;
  double pos_score = 0.0;  // in [0,1], pos_score + neg_score <= 1
  double neg_score = 0.0;
};

struct PolarityWord {
  std::string word;
  bool positive = false;  // dominant sign: pos_score >= neg_score
  double score = 0.0;     // max(pos_score, neg_score) of the matched entry
};

// Word/POS sentiment scores aggregated over senses with 1/rank weights
// (rank-1 senses weigh most). Immutable after parse; lookups are pure.
class PolarityLexicon {
 public:
  // Accepts the SentiWordNet 3.0 TSV layout: '#' comments, otherwise six
  // tab-separated columns POS, ID, PosScore, NegScore, SynsetTerms, Gloss.
  static PolarityLexicon parse(std::istream& stream);
  static PolarityLexicon parse_file(const std::string& path);

  // Exact (word,pos) entry, else the word-only fallback (scores averaged over
  // the POS entries of the word), else nullopt.
  std::optional<LexiconEntry> lookup(const std::string& word, PosTag pos) const;

  std::size_t entry_count() const { return entries_.size(); }
  bool known_as(const std::string& word, PosTag pos) const;
  // Number of distinct POS classes the word appears under; used by the
  // unique-POS tagging rule.
  std::optional<PosTag> unique_pos(const std::string& word) const;

  template <typename Fn>
  void for_each_entry(Fn&& fn) const {
    for (const auto& [key, entry] : entries_) {
      fn(entry);
    }
  }

 private:
  std::unordered_map<std::string, LexiconEntry> entries_;   // key "word#p"
  std::unordered_map<std::string, LexiconEntry> fallback_;  // key word
};

// Deterministic rule tagger. Rule order: closed-class stoplist -> Other;
// suffix rules (-ly -> Adverb; -ing/-ed with a stem the lexicon knows as a
// verb -> Verb; -ous/-ful/-ive/-able/-al -> Adjective); word listed in the
// lexicon under exactly one POS -> that POS; default Noun.
std::vector<PosTag> pos_tag(const std::vector<std::string>& tokens,
                            const PolarityLexicon& lexicon);

inline constexpr double kDefaultTau = 0.1;

// Tokens whose looked-up entry clears max(pos,neg) >= tau, first-occurrence
// order, deduplicated. Tokens containing '_' never match (multiword entries
// are retained in the lexicon but unreachable from single tokens).
std::vector<PolarityWord> extract_polarity_words(const std::vector<std::string>& tokens,
                                                 const std::vector<PosTag>& tags,
                                                 const PolarityLexicon& lexicon,
                                                 double tau = kDefaultTau);

// Convenience: preprocess + tokenize + tag + extract for one raw utterance.
std::vector<PolarityWord> polarity_words_for(const std::string& raw_text,
                                             const PolarityLexicon& lexicon,
                                             double tau = kDefaultTau);

struct PolarityStats {
  double mean_words_per_utterance = 0.0;
  double coverage = 0.0;  // fraction of utterances with >= 1 polarity word
  std::size_t utterances = 0;
  std::size_t total_polarity_words = 0;
};

PolarityStats polarity_stats(const std::vector<std::vector<PolarityWord>>& per_utterance);

}  // namespace emobench
