#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "secrado/dataset.hpp"
#include "secrado/rng.hpp"

namespace secrado {

/// Shared token dictionary: unique lowercase tokens with stable indices.
struct Dictionary {
    std::vector<std::string> tokens;  // sorted

    int size() const { return static_cast<int>(tokens.size()); }
    int index_of(const std::string& token) const;  // -1 when absent
};

struct LabeledCorpus {
    std::vector<std::string> documents;
    std::vector<int> labels;  // -1 or +1

    int size() const { return static_cast<int>(documents.size()); }
    void validate() const;
};

/// Vectorization output for one peer.
struct TextFeatures {
    Dataset data;                // X binary presence matrix, y labels
    std::vector<bool> presence;  // f_p: token seen in any local document
    int dropped_tokens = 0;      // out-of-dictionary occurrences
};

/// Lowercase, split on non-alphanumerics, drop tokens shorter than 2.
std::vector<std::string> tokenize(const std::string& text);

/// Union of all corpus tokens, sorted for determinism.
Dictionary build_dictionary(const std::vector<LabeledCorpus>& corpora);

TextFeatures local_text(const Dictionary& dict, const LabeledCorpus& corpus);

/// Synthetic two-class corpus: each document mixes keywords of its class
/// with shared noise tokens at the given rate.  Linearly separable at
/// noise 0.
LabeledCorpus synth_corpus(const std::vector<std::string>& positive_pool,
                           const std::vector<std::string>& negative_pool, int docs_per_class,
                           double noise_rate, SecureRng& rng);

/// Corpus file: one document per line, "<label>\t<text>", labels +1/-1.
LabeledCorpus read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus);

/// Dictionary file: one token per line.
Dictionary read_dictionary(const std::filesystem::path& path);
void write_dictionary(const std::filesystem::path& path, const Dictionary& dict);

}  // namespace secrado
