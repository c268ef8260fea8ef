// emobench-synth: stand-in corpus generator for demos and experiments.
// Emits dataset CSVs in the workbench schema; `dataset` matches a manifest's
// counts exactly, `separable` and `diluted` build the synthetic experiment
// corpora.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "emobench/dataset.hpp"
#include "emobench/error.hpp"
#include "emobench/synthetic.hpp"

using namespace emobench;

int main(int argc, char** argv) {
  CLI::App app{"stand-in corpus generator"};
  app.require_subcommand(1);

  auto* dataset = app.add_subcommand("dataset", "manifest-matching stand-in dataset");
  std::string manifest_path, out_path;
  std::uint64_t seed = 1;
  dataset->add_option("--manifest", manifest_path)->required();
  dataset->add_option("--out", out_path)->required();
  dataset->add_option("--seed", seed);

  auto* separable = app.add_subcommand("separable", "planted-cue separable corpus");
  std::size_t sep_n = 600;
  double sep_neutral = 0.2;
  std::string sep_out;
  std::uint64_t sep_seed = 1;
  separable->add_option("--n", sep_n);
  separable->add_option("--neutral-frac", sep_neutral);
  separable->add_option("--out", sep_out)->required();
  separable->add_option("--seed", sep_seed);

  auto* diluted = app.add_subcommand("diluted", "distractor-diluted polarity corpus");
  std::size_t dil_n = 300, dil_distractors = 36;
  double dil_neutral = 0.2;
  std::string dil_out;
  std::uint64_t dil_seed = 1;
  diluted->add_option("--n", dil_n);
  diluted->add_option("--neutral-frac", dil_neutral);
  diluted->add_option("--distractors", dil_distractors);
  diluted->add_option("--out", dil_out)->required();
  diluted->add_option("--seed", dil_seed);

  try {
    app.parse(argc, argv);
    if (dataset->parsed()) {
      const auto manifest = DatasetManifest::from_json_file(manifest_path);
      const auto data = make_manifest_dataset(manifest, seed);
      save_dataset_csv(out_path, data);
      std::printf("%zu rows -> %s\n", data.size(), out_path.c_str());
    } else if (separable->parsed()) {
      const auto data = make_separable_corpus(sep_n, sep_neutral, sep_seed);
      save_dataset_csv(sep_out, data);
      std::printf("%zu rows -> %s\n", data.size(), sep_out.c_str());
    } else if (diluted->parsed()) {
      const auto data =
          make_diluted_polarity_corpus(dil_n, dil_neutral, dil_distractors, dil_seed);
      save_dataset_csv(dil_out, data);
      std::printf("%zu rows -> %s\n", data.size(), dil_out.c_str());
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
