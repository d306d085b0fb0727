// Regenerates the bundled synthetic benchmark.
#include <iostream>

#include <CLI11.hpp>

#include "icsu/error.hpp"
#include "icsu/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write the synthetic KB, question corpus and lexicon"};
    std::string out_dir = "data/synthetic";
    std::size_t questions = 300;
    std::uint64_t seed = icsu::kSyntheticSeed;
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--questions", questions, "Number of questions");
    app.add_option("--seed", seed, "Sampling seed");
    CLI11_PARSE(app, argc, argv);

    try {
        auto bench = icsu::make_synthetic_benchmark(questions, seed);
        icsu::write_synthetic(bench, out_dir);
        std::cout << bench.triples.size() << " triples, " << bench.corpus.size() << " questions, "
                  << bench.lexicon.size() << " lexicon entries -> " << out_dir << "\n";
    } catch (const icsu::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
