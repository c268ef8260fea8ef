#pragma once

#include <cstdint>
#include <vector>

#include "emobench/dataset.hpp"

namespace emobench {

// Stand-in dataset whose total and per-emotion counts match the manifest
// exactly. Label overlaps are random, remaining rows are neutral.
std::vector<Utterance> make_manifest_dataset(const DatasetManifest& manifest,
                                             std::uint64_t seed);

// Separable corpus: one planted cue word per emotion inside short filler
// text; neutral_fraction of the rows carry no label and no cue.
std::vector<Utterance> make_separable_corpus(std::size_t n, double neutral_fraction,
                                             std::uint64_t seed);

// Diluted corpus for the polarity-mechanism experiment: cue words are
// sentiment words present in the bundled lexicon fixture above the default
// threshold, buried inside long distractor runs so truncation sometimes hides
// them from the primary stream while the polarity extractor still sees them.
std::vector<Utterance> make_diluted_polarity_corpus(std::size_t n, double neutral_fraction,
                                                    std::size_t distractor_words,
                                                    std::uint64_t seed);

}  // namespace emobench
