#include "emobench/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include "emobench/error.hpp"
#include "emobench/rng.hpp"

namespace emobench {
namespace {

// Filler tokens deliberately absent from the lexicon fixture.
const std::vector<std::string>& fillers() {
  static const std::vector<std::string> words = {
      "merge",   "commit",  "branch",   "rebase",  "pipeline", "compiler", "segfault",
      "pointer", "thread",  "mutex",    "socket",  "buffer",   "parser",   "lexer",
      "driver",  "kernel",  "module",   "packet",  "header",   "payload",  "schema",
      "index",   "cursor",  "retry",    "timeout", "backoff",  "deploy",   "rollback",
      "release", "version", "refactor", "snippet", "stack",    "trace",    "ticket",
      "review",  "patch",   "diff",     "upstream", "tarball", "symbol",   "linker",
      "opcode",  "registry", "daemon",  "webhook", "sandbox",  "quota",    "latency",
      "cache"};
  return words;
}

std::string make_text(Rng& rng, std::size_t filler_count,
                      const std::vector<std::string>& cues) {
  std::vector<std::string> tokens;
  tokens.reserve(filler_count + cues.size());
  for (std::size_t i = 0; i < filler_count; ++i) {
    tokens.push_back(fillers()[rng.next_below(fillers().size())]);
  }
  for (const auto& cue : cues) {
    const std::size_t pos = static_cast<std::size_t>(rng.next_below(tokens.size() + 1));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), cue);
  }
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) {
      text.push_back(' ');
    }
    text += tokens[i];
  }
  return text;
}

std::string row_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u%05zu", i);
  return buf;
}

}  // namespace

std::vector<Utterance> make_manifest_dataset(const DatasetManifest& manifest,
                                             std::uint64_t seed) {
  const std::size_t n = manifest.expected_total;
  if (n == 0) {
    throw ConfigError("make_manifest_dataset: empty manifest");
  }
  std::vector<Utterance> data(n);
  Rng text_rng(derive_seed(seed, "standin-text"));
  for (std::size_t i = 0; i < n; ++i) {
    data[i].id = row_id(i);
  }
  // Per emotion, pick exactly the manifest count of rows; overlaps land where
  // they will, remaining rows stay neutral.
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    if (manifest.expected_counts[e] > n) {
      throw ConfigError("make_manifest_dataset: count exceeds total");
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(derive_seed(seed, "standin-label", e));
    rng.shuffle(rows);
    for (std::size_t k = 0; k < manifest.expected_counts[e]; ++k) {
      data[rows[k]].labels[e] = true;
    }
  }
  static const std::vector<std::string> cue_by_emotion = {"rage",  "adore", "panic",
                                                          "cheer", "weep",  "whoa"};
  for (auto& u : data) {
    std::vector<std::string> cues;
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      if (u.labels[e]) {
        cues.push_back(cue_by_emotion[e]);
      }
    }
    u.text = make_text(text_rng, 5 + text_rng.next_below(6), cues);
  }
  return data;
}

std::vector<Utterance> make_separable_corpus(std::size_t n, double neutral_fraction,
                                             std::uint64_t seed) {
  if (n == 0 || neutral_fraction < 0.0 || neutral_fraction >= 1.0) {
    throw ConfigError("make_separable_corpus: bad arguments");
  }
  static const std::vector<std::string> cue_by_emotion = {"rage",  "adore", "panic",
                                                          "cheer", "weep",  "whoa"};
  const auto neutral_count = static_cast<std::size_t>(neutral_fraction * static_cast<double>(n));
  Rng rng(derive_seed(seed, "separable"));
  std::vector<Utterance> data(n);
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    data[i].id = row_id(i);
    if (i < neutral_count) {
      data[i].text = make_text(rng, 6 + rng.next_below(5), {});
      continue;
    }
    const std::size_t primary = labeled % kNumEmotions;
    ++labeled;
    data[i].labels[primary] = true;
    std::vector<std::string> cues = {cue_by_emotion[primary]};
    if (rng.next_double() < 0.15) {
      const std::size_t second = rng.next_below(kNumEmotions);
      if (second != primary) {
        data[i].labels[second] = true;
        cues.push_back(cue_by_emotion[second]);
      }
    }
    data[i].text = make_text(rng, 6 + rng.next_below(5), cues);
  }
  // Shuffle row order so splits see mixed neutrals; ids stay stable.
  Rng order_rng(derive_seed(seed, "separable-order"));
  order_rng.shuffle(data);
  return data;
}

std::vector<Utterance> make_diluted_polarity_corpus(std::size_t n, double neutral_fraction,
                                                    std::size_t distractor_words,
                                                    std::uint64_t seed) {
  if (n == 0 || neutral_fraction < 0.0 || neutral_fraction >= 1.0 || distractor_words == 0) {
    throw ConfigError("make_diluted_polarity_corpus: bad arguments");
  }
  // All six cues live in the bundled lexicon fixture with max(pos,neg) above
  // the default threshold.
  static const std::vector<std::string> cue_by_emotion = {"hate", "love",        "afraid",
                                                          "happy", "sad", "astonishing"};
  const auto neutral_count = static_cast<std::size_t>(neutral_fraction * static_cast<double>(n));
  Rng rng(derive_seed(seed, "diluted"));
  std::vector<Utterance> data(n);
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    data[i].id = row_id(i);
    const std::size_t filler = distractor_words + rng.next_below(distractor_words / 4 + 1);
    if (i < neutral_count) {
      data[i].text = make_text(rng, filler, {});
      continue;
    }
    const std::size_t primary = labeled % kNumEmotions;
    ++labeled;
    data[i].labels[primary] = true;
    data[i].text = make_text(rng, filler, {cue_by_emotion[primary]});
  }
  Rng order_rng(derive_seed(seed, "diluted-order"));
  order_rng.shuffle(data);
  return data;
}

}  // namespace emobench
